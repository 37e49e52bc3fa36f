#pragma once

#include <functional>
#include <string>
#include <vector>

#include "perdiv/model.hpp"

namespace perdiv {

enum class ObstacleMode {
    every_node,     // nodewise max with the issuance envelope each step
    boundary_only,  // issuance enters only through the x = 0 boundary value
};

struct SchemeConfig {
    int n_t = 256;          // time steps per period
    double theta = 1.0;     // implicitness of the diffusion sub-step, in [0,1]
    ObstacleMode obstacle_mode = ObstacleMode::every_node;

    void validate() const;
};

// Stencil inspection: weights non-negative, row sums e^{-rho dt}. A hard
// violation makes the solver constructors throw; the explicit mixed term for
// corr != 0 is reported as non-monotone but does not block stepping.
struct MonotoneReport {
    bool monotone = true;
    bool hard_violation = false;
    std::string binding_constraint;
    double row_sum_factor = 0.0;  // e^{-rho dt}
};

MonotoneReport check_monotone(const SchemeConfig& cfg, const ModelParams& p,
                              const ReserveGrid& g);
MonotoneReport check_monotone(const SchemeConfig& cfg, const ModelParams& p,
                              const OUParams& ou, const StateGrid2D& g);

// Obstacle bookkeeping over one period march.
struct IssuanceActivity {
    bool any_interior = false;       // obstacle improved a node other than x=0
    double max_interior_gain = 0.0;
    double max_interior_gain_x = 0.0;  // reserve level of the largest gain
    int layers_with_boundary = 0;    // layers whose x=0 value came from issuance
    int layers_total = 0;
};

// One-period march of rho v + (d_t - mu d_x - 1/2 sigma^2 d_xx) v = 0 read as
// an initial-value problem: the layer at tau is the value tau time units
// before the upcoming dividend date, v(0) = phi, L(phi) = v(period).
//
// Per step: monotone linear interpolation at the advection foot x + mu dt,
// theta-weighted diffusion, discounting by e^{-rho dt}, then the issuance
// obstacle. Lateral conditions: absorbing v = 0 at x = 0 (the obstacle turns
// this into (I v)^+ when issuance is on) and the artificial Neumann condition
// at x_max whose slope is e^{-rho tau} at layer tau, so that the affine
// far-field profile is reproduced exactly.
class PeriodSolver1D {
public:
    PeriodSolver1D(const ModelParams& p, const ReserveGrid& g,
                   const SchemeConfig& cfg, bool issuance_enabled);

    // Advance the layer at horizon tau to tau + dt, in place.
    void step(std::vector<double>& v, double tau);

    ValueFn1D solve(const ValueFn1D& phi);

    // obs(layer_index in 1..n_t, tau of the produced layer, layer values)
    using LayerObserver =
        std::function<void(int, double, const std::vector<double>&)>;
    ValueFn1D solve(const ValueFn1D& phi, const LayerObserver& obs);

    double dt() const { return dt_; }
    const ReserveGrid& grid() const { return grid_; }
    const IssuanceActivity& last_activity() const { return activity_; }

private:
    void apply_obstacle(std::vector<double>& v);

    ModelParams p_;
    ReserveGrid grid_;
    SchemeConfig cfg_;
    bool issuance_ = false;
    double h_ = 0.0, dt_ = 0.0, disc_ = 1.0;
    int shift_ = 0;        // advection foot = node + shift + frac
    double frac_ = 0.0;
    double c_imp_ = 0.0;   // theta dt sigma^2 / (2 h^2)
    double c_exp_ = 0.0;   // (1-theta) dt sigma^2 / (2 h^2)
    int k_cap_ = 0;
    std::vector<double> thomas_upper_, thomas_inv_diag_;
    std::vector<double> buf_y_, buf_env_, buf_psi_;
    IssuanceActivity activity_;
};

// Two-dimensional variant with profitability state: drift mu (the state) in
// x, OU drift k(mu_bar - mu) and diffusion sigma_tilde in mu, explicit mixed
// term when corr != 0. Mirrored diffusion stencil at the upper mu edge,
// diffusion dropped at the lower edge. Dividend payouts and issuance act on
// the x axis only.
class PeriodSolver2D {
public:
    PeriodSolver2D(const ModelParams& p, const OUParams& ou,
                   const StateGrid2D& g, const SchemeConfig& cfg,
                   bool issuance_enabled);

    void step(std::vector<double>& v, double tau);
    ValueFn2D solve(const ValueFn2D& phi);

    double dt() const { return dt_; }
    const IssuanceActivity& last_activity() const { return activity_; }

private:
    void apply_obstacle(std::vector<double>& v);

    ModelParams p_;
    OUParams ou_;
    StateGrid2D grid_;
    SchemeConfig cfg_;
    bool issuance_ = false;
    double h_ = 0.0, hm_ = 0.0, dt_ = 0.0, disc_ = 1.0;
    double cx_imp_ = 0.0, cx_exp_ = 0.0;  // x diffusion weights
    double cm_imp_ = 0.0, cm_exp_ = 0.0;  // mu diffusion weights
    double cross_ = 0.0;                  // corr sigma sigma_tilde dt / (4 h hm)
    int k_cap_ = 0;
    std::vector<int> x_shift_, mu_lo_;      // per target mu row
    std::vector<double> x_frac_, mu_frac_;
    std::vector<double> tx_upper_, tx_inv_diag_;  // x tridiagonal factors
    std::vector<double> tm_upper_, tm_inv_diag_;  // mu tridiagonal factors
    std::vector<double> buf_y_, buf_col_, buf_env_, buf_psi_, buf_b0_;
    IssuanceActivity activity_;
};

// Free-function wrappers matching the operator map.
ValueFn1D step_one_dt(const ValueFn1D& v, double t, const ModelParams& p,
                      const SchemeConfig& cfg, bool issuance_enabled = false);
ValueFn1D solve_one_period_1d(const ValueFn1D& phi, const ModelParams& p,
                              const SchemeConfig& cfg,
                              bool issuance_enabled = false);
ValueFn2D solve_one_period_2d(const ValueFn2D& phi, const ModelParams& p,
                              const OUParams& ou, const SchemeConfig& cfg,
                              bool issuance_enabled = false);

}  // namespace perdiv
