#include "perdiv/model.hpp"

#include <algorithm>
#include <cmath>

namespace perdiv {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void ModelParams::validate() const {
    require(std::isfinite(mu) && mu >= 0.0, "mu must be finite and >= 0");
    require(std::isfinite(sigma) && sigma > 0.0, "sigma must be > 0");
    require(std::isfinite(rho) && rho > 0.0, "rho must be > 0");
    require(std::isfinite(period) && period > 0.0, "period must be > 0");
    require(std::isfinite(lambda_f) && lambda_f > 0.0, "lambda_f must be > 0");
    require(std::isfinite(lambda_p) && lambda_p >= 0.0, "lambda_p must be >= 0");
    require(std::isfinite(zeta_max) && zeta_max > 0.0, "zeta_max must be > 0");
}

double a_star(const ModelParams& p) {
    return p.mu * p.period / std::expm1(p.rho * p.period);
}

CostFn make_cost(const ModelParams& p) { return CostFn{p.lambda_f, p.lambda_p}; }

void OUParams::validate() const {
    require(std::isfinite(k) && k > 0.0, "k must be > 0");
    require(std::isfinite(mu_bar), "mu_bar must be finite");
    require(std::isfinite(sigma_tilde) && sigma_tilde > 0.0, "sigma_tilde must be > 0");
    require(std::isfinite(corr) && std::abs(corr) <= 1.0, "corr must lie in [-1, 1]");
}

std::vector<double> ReserveGrid::nodes() const {
    std::vector<double> xs(n_x);
    for (int i = 0; i < n_x; ++i) xs[i] = node(i);
    return xs;
}

void ReserveGrid::validate() const {
    require(n_x >= 3, "reserve grid needs at least 3 nodes");
    require(std::isfinite(x_max) && x_max > 0.0, "x_max must be > 0");
}

void StateGrid2D::validate() const {
    reserve.validate();
    require(n_mu >= 3, "mu grid needs at least 3 nodes");
    require(mu_min < mu_max, "mu_min must be below mu_max");
}

ValueFn1D ValueFn1D::zeros(const ReserveGrid& g) {
    return {g, std::vector<double>(g.n_x, 0.0)};
}

ValueFn1D ValueFn1D::identity(const ReserveGrid& g) {
    ValueFn1D f{g, std::vector<double>(g.n_x)};
    for (int i = 0; i < g.n_x; ++i) f.v[i] = g.node(i);
    return f;
}

double ValueFn1D::operator()(double x) const {
    const double h = grid.spacing();
    if (x <= 0.0) return v.front();
    if (x >= grid.x_max) return v.back();
    const double s = x / h;
    const int i = std::min(static_cast<int>(s), grid.n_x - 2);
    const double w = s - i;
    return (1.0 - w) * v[i] + w * v[i + 1];
}

ValueFn2D ValueFn2D::zeros(const StateGrid2D& g) {
    return {g, std::vector<double>(g.n_nodes(), 0.0)};
}

ValueFn2D ValueFn2D::identity(const StateGrid2D& g) {
    ValueFn2D f{g, std::vector<double>(g.n_nodes())};
    for (int j = 0; j < g.n_mu; ++j)
        for (int i = 0; i < g.reserve.n_x; ++i) f.at(i, j) = g.reserve.node(i);
    return f;
}

double Policy::issuance_target_at(double time_in_period, int slice) const {
    if (issuance_times.empty()) return std::nan("");
    // nearest recorded layer
    size_t best = 0;
    double best_d = std::abs(issuance_times[0] - time_in_period);
    for (size_t t = 1; t < issuance_times.size(); ++t) {
        const double d = std::abs(issuance_times[t] - time_in_period);
        if (d < best_d) { best_d = d; best = t; }
    }
    return issuance_targets[best * dividend_barrier.size() + slice];
}

void Policy::validate() const {
    require(dividend_barrier.size() == liquidation_barrier.size() &&
                dividend_barrier.size() == fully_liquidating.size(),
            "policy slice arrays must agree in length");
    for (size_t j = 0; j < dividend_barrier.size(); ++j) {
        const double liq = liquidation_barrier[j];
        if (!std::isnan(liq))
            require(liq <= dividend_barrier[j],
                    "liquidation barrier must not exceed the dividend barrier");
    }
    if (!issuance_times.empty())
        require(issuance_targets.size() ==
                    issuance_times.size() * dividend_barrier.size(),
                "issuance schedule shape mismatch");
}

double default_x_max(const ModelParams& p, double barrier_estimate) {
    return 4.0 * std::max(barrier_estimate, a_star(p) + p.mu * p.period);
}

ModelParams resolve_zeta_max(ModelParams p, const ReserveGrid& g) {
    if (p.zeta_max <= 0.0) p.zeta_max = g.x_max;
    return p;
}

}  // namespace perdiv
