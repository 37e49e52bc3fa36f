#pragma once

#include "perdiv/model.hpp"

namespace perdiv {

struct McConfig {
    long n_paths = 100000;
    double dt = 1.0 / 64.0;       // simulation step; dividend dates land on steps
    unsigned long long seed = 20240901ULL;
    int horizon_periods = 200;    // truncation; bias <= e^{-rho T H}(x_max + a_star)
    bool bridge_ruin = true;      // Brownian-bridge crossing test per step
    int n_threads = 1;

    void validate(const ModelParams& p) const;
};

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    long n_paths = 0;
};

// Smallest horizon whose truncation bias bound e^{-rho T H}(x_max + a_star)
// stays below the target.
int horizon_for_bias(const ModelParams& p, double x_max, double bias_target);

// Policy valuation: pays (X - barrier)^+ at every dividend date (including
// t = 0), liquidates below the liquidation barrier, issues to the scheduled
// target when the reserves hit zero (ruin if no schedule applies), and stops
// at ruin or after horizon_periods. Estimates are bit-reproducible for a
// fixed seed, independent of n_threads. sigma = 0 is accepted here (the
// degenerate deterministic cash flow).
McEstimate evaluate_policy(const Policy& pol, double x0, const ModelParams& p,
                           const McConfig& mc);
McEstimate evaluate_policy(const Policy& pol, double x0, double mu0,
                           const ModelParams& p, const OUParams& ou,
                           const McConfig& mc);

// One-period valuation of a fixed terminal function with no controls:
// E[e^{-rho tau} phi(X_tau) 1{no ruin}], the oracle for individual scheme
// steps and for solve_one_period.
McEstimate mc_one_period(const ValueFn1D& phi, double x0, const ModelParams& p,
                         double horizon, const McConfig& mc);
McEstimate mc_one_period(const ValueFn2D& phi, double x0, double mu0,
                         const ModelParams& p, const OUParams& ou,
                         double horizon, const McConfig& mc);

// Exact OU transition over one step: mean/sd of mu_{t+dt} given mu_t.
double ou_step_mean(const OUParams& ou, double mu, double dt);
double ou_step_sd(const OUParams& ou, double dt);

}  // namespace perdiv
