#pragma once

#include "perdiv/fixed_point.hpp"
#include "perdiv/model.hpp"
#include "perdiv/pde_engine.hpp"

namespace perdiv {

// Closed-form continuous-dividend barrier solution of
// 1/2 sigma^2 V'' + mu V' - rho V = 0 on (0, b*), V(0) = 0, smooth fit
// V'(b*) = 1, V''(b*) = 0, and V(x) = V(b*) + (x - b*) beyond the barrier.
struct ClosedForm1D {
    double r_plus = 0.0;
    double r_minus = 0.0;
    double b_star = 0.0;
    double denom = 1.0;  // r+ e^{r+ b*} - r- e^{r- b*}

    double value(double x) const;
    double derivative(double x) const;
    ValueFn1D sample(const ReserveGrid& g) const;
};

ClosedForm1D closed_form_1d(const ModelParams& p);

// Continuous-dividend reference by period halving: re-solves the discrete
// fixed point with period T/2^j for j = j0 .. j0 + n_halvings, warm-starting
// each stage from the previous one, and returns the last iterate together
// with the sup-norm gaps between stages (flagged if they fail to decrease).
struct ContinuousLimit1D {
    ValueFn1D value;
    std::vector<double> gaps;
    bool gaps_decreasing = true;
    bool converged = true;
};

struct ContinuousLimit2D {
    ValueFn2D value;
    std::vector<double> gaps;
    bool gaps_decreasing = true;
    bool converged = true;
};

ContinuousLimit1D continuous_limit_1d(const ModelParams& p,
                                      const ReserveGrid& g,
                                      const SchemeConfig& cfg,
                                      bool issuance_enabled = false,
                                      int j0 = 4, int n_halvings = 3,
                                      double tol = 1e-8,
                                      const ValueFn1D* warm_start = nullptr);

ContinuousLimit2D continuous_limit_2d(const ModelParams& p, const OUParams& ou,
                                      const StateGrid2D& g,
                                      const SchemeConfig& cfg,
                                      bool issuance_enabled, int j0 = 4,
                                      int n_halvings = 3, double tol = 1e-8,
                                      const ValueFn2D* warm_start = nullptr);

}  // namespace perdiv
