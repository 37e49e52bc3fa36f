#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace perdiv {

// Scalar problem data. Rates are per year, reserve quantities share one unit
// (fractions of risk-weighted assets in the calibrated runs).
struct ModelParams {
    double mu = 0.01;        // cash-flow drift
    double sigma = 0.01;     // cash-flow volatility
    double rho = 0.04;       // discount rate
    double period = 1.0;     // time between dividend dates
    double lambda_f = 0.0025;// fixed issuance cost
    double lambda_p = 0.0;   // proportional issuance cost
    double zeta_max = 0.0;   // cap on a single issuance; <= 0 means "use x_max"

    // Throws std::invalid_argument on any violated range. Solvers call this
    // after resolve_zeta_max(), so zeta_max must be positive by then.
    void validate() const;
};

// Tightest constant for which the one-period operator preserves the cone
// bound x <= phi(x) <= x + A:  mu*T / (e^{rho*T} - 1).
double a_star(const ModelParams& p);

// Issuance cost c(zeta) = (lambda_f + (1 + lambda_p) * zeta) * 1{zeta > 0}.
// Superadditive; c(zeta) >= zeta whenever lambda_f > 0, lambda_p >= 0.
struct CostFn {
    double lambda_f = 0.0;
    double lambda_p = 0.0;
    double operator()(double zeta) const {
        if (zeta < 0.0) throw std::domain_error("issuance size must be >= 0");
        if (zeta == 0.0) return 0.0;
        return lambda_f + (1.0 + lambda_p) * zeta;
    }
};

CostFn make_cost(const ModelParams& p);

// Ornstein-Uhlenbeck profitability: d mu = k (mu_bar - mu) dt + sigma_tilde dW~.
struct OUParams {
    double k = 0.5;            // mean-reversion speed
    double mu_bar = 0.15;      // long-run profitability
    double sigma_tilde = 0.3;  // profitability volatility
    double corr = 0.0;         // correlation of the two Brownian motions

    void validate() const;
};

// Uniform grid on [0, x_max]; node 0 sits exactly at x = 0.
struct ReserveGrid {
    double x_max = 0.0;
    int n_x = 0;

    double spacing() const { return x_max / (n_x - 1); }
    double node(int i) const { return x_max * i / (n_x - 1); }
    std::vector<double> nodes() const;
    void validate() const;

    bool operator==(const ReserveGrid&) const = default;
};

struct StateGrid2D {
    ReserveGrid reserve;
    double mu_min = 0.0;
    double mu_max = 0.0;
    int n_mu = 0;

    double mu_spacing() const { return (mu_max - mu_min) / (n_mu - 1); }
    double mu_node(int j) const {
        return mu_min + (mu_max - mu_min) * j / (n_mu - 1);
    }
    long n_nodes() const { return static_cast<long>(reserve.n_x) * n_mu; }
    void validate() const;

    bool operator==(const StateGrid2D&) const = default;
};

// Sampled value function on a reserve grid.
struct ValueFn1D {
    ReserveGrid grid;
    std::vector<double> v;

    static ValueFn1D zeros(const ReserveGrid& g);
    // phi(x) = x, the canonical cone member used as initial guess.
    static ValueFn1D identity(const ReserveGrid& g);

    double operator()(double x) const;  // monotone linear interpolation
};

// Sampled value function on a 2-D state grid; x is the fast index.
struct ValueFn2D {
    StateGrid2D grid;
    std::vector<double> v;

    static ValueFn2D zeros(const StateGrid2D& g);
    static ValueFn2D identity(const StateGrid2D& g);  // phi(x, mu) = x

    double& at(int i, int j) { return v[static_cast<size_t>(j) * grid.reserve.n_x + i]; }
    double at(int i, int j) const { return v[static_cast<size_t>(j) * grid.reserve.n_x + i]; }
    double* slice(int j) { return v.data() + static_cast<size_t>(j) * grid.reserve.n_x; }
    const double* slice(int j) const { return v.data() + static_cast<size_t>(j) * grid.reserve.n_x; }
};

// Barriers and issuance targets read off a value function. One entry per
// mu-slice; a single slice in one dimension. NaN marks an absent barrier.
struct Policy {
    std::vector<double> mu_nodes;             // empty in 1-D
    std::vector<double> dividend_barrier;     // post-payout target level
    std::vector<double> liquidation_barrier;  // NaN where absent
    std::vector<char> fully_liquidating;      // barrier at zero, pay everything

    // Issuance target when reserves hit zero, per (time-in-period, slice);
    // NaN where issuance is inactive. Empty when no schedule was attached.
    std::vector<double> issuance_times;
    std::vector<double> issuance_targets;  // time-major [t * n_slices + j]

    int n_slices() const { return static_cast<int>(dividend_barrier.size()); }
    bool has_issuance_schedule() const { return !issuance_times.empty(); }
    double issuance_target_at(double time_in_period, int slice) const;
    void validate() const;
};

// Per-iteration record of the fixed-point driver.
struct IterationDiagnostics {
    std::vector<double> distances;  // successive-iterate distance
    std::vector<double> ratios;     // distance(n+1)/distance(n) where defined
    int iterations = 0;
    bool converged = false;
};

// Default domain edge: 4 * max(barrier estimate, a_star + mu*T). The solvers
// warn (via the returned flag in Policy extraction paths) when a computed
// barrier exceeds x_max / 2.
double default_x_max(const ModelParams& p, double barrier_estimate);

// zeta_max <= 0 defers to the grid edge.
ModelParams resolve_zeta_max(ModelParams p, const ReserveGrid& g);

}  // namespace perdiv
