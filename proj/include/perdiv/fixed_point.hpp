#pragma once

#include <functional>
#include <optional>

#include "perdiv/model.hpp"
#include "perdiv/pde_engine.hpp"

namespace perdiv {

// One application of the composed period map T = D o L.
ValueFn1D apply_T(const ValueFn1D& phi, const ModelParams& p,
                  const SchemeConfig& cfg, bool issuance_enabled);
ValueFn2D apply_T(const ValueFn2D& phi, const ModelParams& p,
                  const OUParams& ou, const SchemeConfig& cfg,
                  bool issuance_enabled);

enum class DistanceKind { sup, alpha_weighted };

struct FixedPointOptions {
    double tol = 1e-8;
    int max_iter = 2000;
    // Replace the payout optimization by a fixed-barrier rule (used for the
    // value of a mis-calibrated policy; barrier = x_max means never pay).
    std::optional<double> fixed_payout_barrier;
    // Distance used for stopping and diagnostics (2-D only; 1-D is sup-norm).
    DistanceKind distance = DistanceKind::alpha_weighted;
    // Called after every iteration with (iteration, distance, ratio-or-NaN).
    std::function<void(int, double, double)> on_iteration;
};

struct FixedPointResult1D {
    ValueFn1D value;
    IterationDiagnostics diagnostics;
};

struct FixedPointResult2D {
    ValueFn2D value;
    IterationDiagnostics diagnostics;
};

// Value iteration phi_{n+1} = T phi_n until the successive-iterate distance
// drops below tol. Non-convergence within max_iter flags the result rather
// than throwing.
FixedPointResult1D iterate(const ValueFn1D& phi0, const ModelParams& p,
                           const SchemeConfig& cfg, bool issuance_enabled,
                           const FixedPointOptions& opts = {});
FixedPointResult2D iterate(const ValueFn2D& phi0, const ModelParams& p,
                           const OUParams& ou, const SchemeConfig& cfg,
                           bool issuance_enabled,
                           const FixedPointOptions& opts = {});

// Weight alpha(mu) = mu^+ + A with the tightest admissible constant
// A = max( (mu_bar + sigma_tilde sqrt((e^{2k}-1)/(k pi))) / (e^{rho T/2}-1), 1 ).
struct AlphaFn {
    double A = 1.0;
    double operator()(double mu) const { return (mu > 0.0 ? mu : 0.0) + A; }
};

AlphaFn alpha_fn(const OUParams& ou, const ModelParams& p);

// d_alpha(phi, psi) = max over nodes of |phi - psi| / alpha(mu).
double weighted_distance(const ValueFn2D& phi, const ValueFn2D& psi,
                         const AlphaFn& alpha);

double sup_distance(const ValueFn1D& phi, const ValueFn1D& psi);
double sup_distance(const ValueFn2D& phi, const ValueFn2D& psi);

// A-priori iteration bound from the contraction constant: smallest n with
// d0 q^n < tol, q = e^{-rho T} (1-D sup norm).
int iteration_bound(double d0, double rho, double period, double tol);

}  // namespace perdiv
