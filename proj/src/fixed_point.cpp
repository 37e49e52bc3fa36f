#include "perdiv/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "perdiv/dividend_ops.hpp"

namespace perdiv {

namespace {

constexpr double kRatioFloor = 1e-15;

void record(IterationDiagnostics& diag, double dist,
            const std::function<void(int, double, double)>& cb) {
    double ratio = std::nan("");
    if (!diag.distances.empty() && diag.distances.back() > kRatioFloor) {
        ratio = dist / diag.distances.back();
        diag.ratios.push_back(ratio);
    }
    diag.distances.push_back(dist);
    ++diag.iterations;
    if (cb) cb(diag.iterations, dist, ratio);
}

}  // namespace

ValueFn1D apply_T(const ValueFn1D& phi, const ModelParams& p,
                  const SchemeConfig& cfg, bool issuance_enabled) {
    PeriodSolver1D solver(p, phi.grid, cfg, issuance_enabled);
    return payout_envelope(solver.solve(phi));
}

ValueFn2D apply_T(const ValueFn2D& phi, const ModelParams& p,
                  const OUParams& ou, const SchemeConfig& cfg,
                  bool issuance_enabled) {
    PeriodSolver2D solver(p, ou, phi.grid, cfg, issuance_enabled);
    return payout_envelope(solver.solve(phi));
}

double sup_distance(const ValueFn1D& phi, const ValueFn1D& psi) {
    if (!(phi.grid == psi.grid))
        throw std::invalid_argument("sup_distance: grid mismatch");
    double d = 0.0;
    for (size_t i = 0; i < phi.v.size(); ++i)
        d = std::max(d, std::abs(phi.v[i] - psi.v[i]));
    return d;
}

double sup_distance(const ValueFn2D& phi, const ValueFn2D& psi) {
    if (!(phi.grid == psi.grid))
        throw std::invalid_argument("sup_distance: grid mismatch");
    double d = 0.0;
    for (size_t i = 0; i < phi.v.size(); ++i)
        d = std::max(d, std::abs(phi.v[i] - psi.v[i]));
    return d;
}

AlphaFn alpha_fn(const OUParams& ou, const ModelParams& p) {
    ou.validate();
    const double spread =
        ou.sigma_tilde * std::sqrt(std::expm1(2.0 * ou.k) / (ou.k * std::numbers::pi));
    const double denom = std::expm1(p.rho * p.period / 2.0);
    return AlphaFn{std::max((ou.mu_bar + spread) / denom, 1.0)};
}

double weighted_distance(const ValueFn2D& phi, const ValueFn2D& psi,
                         const AlphaFn& alpha) {
    if (!(phi.grid == psi.grid))
        throw std::invalid_argument("weighted_distance: grid mismatch");
    const int n = phi.grid.reserve.n_x;
    double d = 0.0;
    for (int j = 0; j < phi.grid.n_mu; ++j) {
        const double inv_a = 1.0 / alpha(phi.grid.mu_node(j));
        const double* a = phi.slice(j);
        const double* b = psi.slice(j);
        for (int i = 0; i < n; ++i) d = std::max(d, std::abs(a[i] - b[i]) * inv_a);
    }
    return d;
}

int iteration_bound(double d0, double rho, double period, double tol) {
    if (d0 <= tol) return 0;
    return static_cast<int>(std::ceil(std::log(d0 / tol) / (rho * period)));
}

FixedPointResult1D iterate(const ValueFn1D& phi0, const ModelParams& p,
                           const SchemeConfig& cfg, bool issuance_enabled,
                           const FixedPointOptions& opts) {
    if (opts.tol <= 0.0) throw std::invalid_argument("tol must be positive");
    PeriodSolver1D solver(p, phi0.grid, cfg, issuance_enabled);
    FixedPointResult1D out{phi0, {}};
    const auto xs = phi0.grid.nodes();
    std::vector<double> next(phi0.grid.n_x);
    for (int it = 0; it < opts.max_iter; ++it) {
        ValueFn1D lphi = solver.solve(out.value);
        if (opts.fixed_payout_barrier)
            lphi = fixed_barrier_payout(lphi, *opts.fixed_payout_barrier);
        else
            kernels::payout_sweep(lphi.v.data(), xs.data(), phi0.grid.n_x,
                                  lphi.v.data());
        const double dist = sup_distance(lphi, out.value);
        out.value = std::move(lphi);
        record(out.diagnostics, dist, opts.on_iteration);
        if (dist < opts.tol) {
            out.diagnostics.converged = true;
            break;
        }
    }
    return out;
}

FixedPointResult2D iterate(const ValueFn2D& phi0, const ModelParams& p,
                           const OUParams& ou, const SchemeConfig& cfg,
                           bool issuance_enabled,
                           const FixedPointOptions& opts) {
    if (opts.tol <= 0.0) throw std::invalid_argument("tol must be positive");
    PeriodSolver2D solver(p, ou, phi0.grid, cfg, issuance_enabled);
    const AlphaFn alpha = alpha_fn(ou, p);
    FixedPointResult2D out{phi0, {}};
    for (int it = 0; it < opts.max_iter; ++it) {
        ValueFn2D tphi = payout_envelope(solver.solve(out.value));
        const double dist = (opts.distance == DistanceKind::alpha_weighted)
                                ? weighted_distance(tphi, out.value, alpha)
                                : sup_distance(tphi, out.value);
        out.value = std::move(tphi);
        record(out.diagnostics, dist, opts.on_iteration);
        if (dist < opts.tol) {
            out.diagnostics.converged = true;
            break;
        }
    }
    return out;
}

}  // namespace perdiv
