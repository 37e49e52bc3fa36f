#include "perdiv/reference_continuous.hpp"

#include <algorithm>
#include <cmath>

namespace perdiv {

ClosedForm1D closed_form_1d(const ModelParams& p) {
    const double s2 = p.sigma * p.sigma;
    const double root = std::sqrt(p.mu * p.mu + 2.0 * s2 * p.rho);
    ClosedForm1D cf;
    cf.r_plus = (-p.mu + root) / s2;
    cf.r_minus = (-p.mu - root) / s2;
    // V''(b*) = 0  <=>  e^{(r+ - r-) b*} = r-^2 / r+^2
    cf.b_star = std::log((cf.r_minus * cf.r_minus) / (cf.r_plus * cf.r_plus)) /
                (cf.r_plus - cf.r_minus);
    cf.denom = cf.r_plus * std::exp(cf.r_plus * cf.b_star) -
               cf.r_minus * std::exp(cf.r_minus * cf.b_star);
    return cf;
}

double ClosedForm1D::value(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= b_star) {
        const double vb =
            (std::exp(r_plus * b_star) - std::exp(r_minus * b_star)) / denom;
        return vb + (x - b_star);
    }
    return (std::exp(r_plus * x) - std::exp(r_minus * x)) / denom;
}

double ClosedForm1D::derivative(double x) const {
    if (x >= b_star) return 1.0;
    return (r_plus * std::exp(r_plus * x) - r_minus * std::exp(r_minus * x)) /
           denom;
}

ValueFn1D ClosedForm1D::sample(const ReserveGrid& g) const {
    ValueFn1D out{g, std::vector<double>(g.n_x)};
    for (int i = 0; i < g.n_x; ++i) out.v[i] = value(g.node(i));
    return out;
}

namespace {

// Stage schedule shared by the 1-D and 2-D limits.
struct Stage {
    double period;
    int n_t;
    int max_iter;
};

std::vector<Stage> halving_stages(const ModelParams& p, const SchemeConfig& cfg,
                                  int j0, int n_halvings, double tol) {
    std::vector<Stage> stages;
    for (int j = j0; j <= j0 + n_halvings; ++j) {
        Stage st;
        const double scale = std::pow(2.0, j);
        st.period = p.period / scale;
        st.n_t = std::max(2, static_cast<int>(std::lround(cfg.n_t / scale)));
        // contraction-rate bound with generous headroom; the alpha-metric rate
        // is rho T_j / 2
        const double rate = 0.5 * p.rho * st.period;
        const double budget = std::log(1e12 / std::min(tol, 1e-6));
        st.max_iter = static_cast<int>(std::min(2.0e6, budget / rate + 2000.0));
        stages.push_back(st);
    }
    return stages;
}

}  // namespace

ContinuousLimit1D continuous_limit_1d(const ModelParams& p,
                                      const ReserveGrid& g,
                                      const SchemeConfig& cfg,
                                      bool issuance_enabled, int j0,
                                      int n_halvings, double tol,
                                      const ValueFn1D* warm_start) {
    ContinuousLimit1D out;
    out.value = warm_start ? *warm_start : ValueFn1D::identity(g);
    bool first = true;
    for (const Stage& st : halving_stages(p, cfg, j0, n_halvings, tol)) {
        ModelParams pj = p;
        pj.period = st.period;
        SchemeConfig cj = cfg;
        cj.n_t = st.n_t;
        FixedPointOptions opts;
        opts.tol = tol;
        opts.max_iter = st.max_iter;
        auto res = iterate(out.value, pj, cj, issuance_enabled, opts);
        out.converged = out.converged && res.diagnostics.converged;
        if (!first) out.gaps.push_back(sup_distance(res.value, out.value));
        out.value = std::move(res.value);
        first = false;
    }
    for (size_t i = 1; i < out.gaps.size(); ++i)
        if (out.gaps[i] > out.gaps[i - 1]) out.gaps_decreasing = false;
    return out;
}

ContinuousLimit2D continuous_limit_2d(const ModelParams& p, const OUParams& ou,
                                      const StateGrid2D& g,
                                      const SchemeConfig& cfg,
                                      bool issuance_enabled, int j0,
                                      int n_halvings, double tol,
                                      const ValueFn2D* warm_start) {
    ContinuousLimit2D out;
    out.value = warm_start ? *warm_start : ValueFn2D::identity(g);
    bool first = true;
    for (const Stage& st : halving_stages(p, cfg, j0, n_halvings, tol)) {
        ModelParams pj = p;
        pj.period = st.period;
        SchemeConfig cj = cfg;
        cj.n_t = st.n_t;
        FixedPointOptions opts;
        opts.tol = tol;
        opts.max_iter = st.max_iter;
        opts.distance = DistanceKind::sup;  // alpha rescales with the period
        auto res = iterate(out.value, pj, ou, cj, issuance_enabled, opts);
        out.converged = out.converged && res.diagnostics.converged;
        if (!first) out.gaps.push_back(sup_distance(res.value, out.value));
        out.value = std::move(res.value);
        first = false;
    }
    for (size_t i = 1; i < out.gaps.size(); ++i)
        if (out.gaps[i] > out.gaps[i - 1]) out.gaps_decreasing = false;
    return out;
}

}  // namespace perdiv
