#pragma once

#include <optional>

#include "perdiv/model.hpp"

namespace perdiv {

// Dividend-date payout optimization: out(x) = sup_{0<=l<=x} (phi(x-l) + l),
// equal to x + max_{y<=x}(phi(y)-y) and computed by one prefix-maximum sweep.
// out(0) = phi(0); out >= phi pointwise; out(x)-x non-decreasing; applying it
// twice returns the first result bit-for-bit.
ValueFn1D payout_envelope(const ValueFn1D& phi);

// Slice-wise along x; dividends do not act on the profitability axis.
ValueFn2D payout_envelope(const ValueFn2D& phi);

// Evaluates the (possibly suboptimal) rule that pays x - barrier whenever
// x > barrier. The barrier is snapped to the nearest grid node.
ValueFn1D fixed_barrier_payout(const ValueFn1D& phi, double barrier);

// Issuance intervention: out(x) = max over grid-resolved zeta in (0, zeta_max]
// of phi(x + zeta) - lambda_f - (1 + lambda_p) zeta, with phi extended
// linearly with slope 1 beyond x_max. Exact nodewise enumeration; the PDE
// march uses the equivalent fast kernel below.
ValueFn1D issuance_envelope(const ValueFn1D& phi, const ModelParams& p);
ValueFn2D issuance_envelope(const ValueFn2D& phi, const ModelParams& p);

// Envelope value at one node together with the smallest maximizing issuance.
struct IssuanceChoice {
    double value = 0.0;
    double zeta = 0.0;
};
IssuanceChoice issuance_best(const ValueFn1D& phi, const ModelParams& p,
                             int node);

// Smallest zeta attaining the issuance envelope at node i, if the envelope
// strictly exceeds phi there; std::nullopt where issuance is not profitable.
std::optional<double> issuance_target(const ValueFn1D& phi,
                                      const ModelParams& p, int node);

// Reads dividend/liquidation barriers off a (converged) value function.
// dividend barrier: smallest node maximizing phi(y) - y, per mu-slice.
// liquidation barrier: upper edge of the payout-to-zero region, detected via
// the prefix maximum staying within liq_tol of phi(0); absent when the region
// stops at node 0. A slice whose maximizer sits at 0 is fully liquidating.
Policy extract_barriers(const ValueFn1D& phi, double liq_tol = 1e-6);
Policy extract_barriers(const ValueFn2D& phi, double liq_tol = 1e-6);

namespace kernels {

// In-place capable payout sweep on one slice. xs are the node abscissae.
void payout_sweep(const double* phi, const double* xs, int n, double* out);

// Fast issuance envelope on one slice (suffix maximum / sliding window over
// the transform phi_j - (1+lambda_p) x_j). Matches the exact enumeration up
// to a few ulp; monotone in phi. k_cap = floor(zeta_max / h).
void issuance_sweep(const double* phi, int n, double h, int k_cap,
                    double lambda_f, double lambda_p, double* scratch,
                    double* out);

// Exact enumeration at a single node (the reference path).
double issuance_envelope_node(const double* phi, int n, double h, int k_cap,
                              const CostFn& cost, int i);

int issuance_k_cap(double zeta_max, double h);

}  // namespace kernels

}  // namespace perdiv
