#include <algorithm>
#include <cmath>

#include "perdiv/dividend_ops.hpp"
#include "perdiv/pde_engine.hpp"
#include "tridiag.hpp"

namespace perdiv {

namespace {
constexpr double kActivityTol = 1e-11;
}

void SchemeConfig::validate() const {
    if (n_t < 2) throw std::invalid_argument("n_t must be at least 2");
    if (!(theta >= 0.0 && theta <= 1.0))
        throw std::invalid_argument("theta must lie in [0, 1]");
}

MonotoneReport check_monotone(const SchemeConfig& cfg, const ModelParams& p,
                              const ReserveGrid& g) {
    MonotoneReport rep;
    const double dt = p.period / cfg.n_t;
    const double h = g.spacing();
    rep.row_sum_factor = std::exp(-p.rho * dt);
    const double w_center = 1.0 - (1.0 - cfg.theta) * dt * p.sigma * p.sigma / (h * h);
    if (w_center < 0.0) {
        rep.monotone = false;
        rep.hard_violation = true;
        rep.binding_constraint =
            "explicit diffusion weight negative: dt > h^2 / ((1-theta) sigma^2)";
    }
    return rep;
}

MonotoneReport check_monotone(const SchemeConfig& cfg, const ModelParams& p,
                              const OUParams& ou, const StateGrid2D& g) {
    MonotoneReport rep = check_monotone(cfg, p, g.reserve);
    const double dt = p.period / cfg.n_t;
    const double hm = g.mu_spacing();
    const double wm_center =
        1.0 - (1.0 - cfg.theta) * dt * ou.sigma_tilde * ou.sigma_tilde / (hm * hm);
    if (!rep.hard_violation && wm_center < 0.0) {
        rep.monotone = false;
        rep.hard_violation = true;
        rep.binding_constraint =
            "explicit mu diffusion weight negative: dt > hm^2 / ((1-theta) sigma_tilde^2)";
    }
    if (!rep.hard_violation && ou.k * dt > 1.0) {
        rep.monotone = false;
        rep.hard_violation = true;
        rep.binding_constraint = "k dt > 1: mean-reversion feet cross";
    }
    if (rep.monotone && ou.corr != 0.0) {
        rep.monotone = false;
        rep.binding_constraint =
            "explicit mixed derivative term (corr != 0) has signed weights";
    }
    return rep;
}

PeriodSolver1D::PeriodSolver1D(const ModelParams& p, const ReserveGrid& g,
                               const SchemeConfig& cfg, bool issuance_enabled)
    : p_(resolve_zeta_max(p, g)), grid_(g), cfg_(cfg), issuance_(issuance_enabled) {
    grid_.validate();
    p_.validate();
    cfg_.validate();
    const auto rep = check_monotone(cfg_, p_, grid_);
    if (rep.hard_violation)
        throw std::invalid_argument("scheme not monotone: " + rep.binding_constraint);

    h_ = grid_.spacing();
    dt_ = p_.period / cfg_.n_t;
    disc_ = std::exp(-p_.rho * dt_);
    const double off = p_.mu * dt_ / h_;
    shift_ = static_cast<int>(std::floor(off));
    frac_ = off - shift_;
    c_imp_ = cfg_.theta * dt_ * p_.sigma * p_.sigma / (2.0 * h_ * h_);
    c_exp_ = (1.0 - cfg_.theta) * dt_ * p_.sigma * p_.sigma / (2.0 * h_ * h_);
    k_cap_ = kernels::issuance_k_cap(p_.zeta_max, h_);

    const int n = grid_.n_x;
    if (c_imp_ > 0.0) {
        std::vector<double> sub(n, -c_imp_), diag(n, 1.0 + 2.0 * c_imp_), sup(n, -c_imp_);
        sub[0] = 0.0;
        diag[0] = 1.0;  // absorbing boundary row
        sup[0] = 0.0;
        diag[n - 1] = 1.0 + c_imp_;  // Neumann ghost eliminated
        sup[n - 1] = 0.0;
        const auto f = detail::factor_tridiag(sub, diag, sup);
        thomas_upper_ = f.upper;
        thomas_inv_diag_ = f.inv_diag;
    }
    buf_y_.resize(n);
    buf_env_.resize(n);
    buf_psi_.resize(n);
}

void PeriodSolver1D::apply_obstacle(std::vector<double>& v) {
    const int n = grid_.n_x;
    ++activity_.layers_total;
    if (cfg_.obstacle_mode == ObstacleMode::boundary_only) {
        const double env0 = kernels::issuance_envelope_node(
            v.data(), n, h_, k_cap_, make_cost(p_), 0);
        v[0] = std::max(env0, 0.0);  // the (I v)^+ lateral value
        if (env0 > 0.0) ++activity_.layers_with_boundary;
        return;
    }
    kernels::issuance_sweep(v.data(), n, h_, k_cap_, p_.lambda_f, p_.lambda_p,
                            buf_psi_.data(), buf_env_.data());
    if (buf_env_[0] > kActivityTol) ++activity_.layers_with_boundary;
    v[0] = std::max(buf_env_[0], 0.0);
    for (int i = 1; i < n; ++i) {
        if (buf_env_[i] > v[i]) {
            const double gain = buf_env_[i] - v[i];
            if (gain > kActivityTol) {
                activity_.any_interior = true;
                if (gain > activity_.max_interior_gain) {
                    activity_.max_interior_gain = gain;
                    activity_.max_interior_gain_x = i * h_;
                }
            }
            v[i] = buf_env_[i];
        }
    }
}

void PeriodSolver1D::step(std::vector<double>& v, double tau) {
    const int n = grid_.n_x;
    const double g = std::exp(-p_.rho * tau);  // far-field slope of the input layer
    // lagged lateral value at x = 0 (zero when ruin absorbs, the previous
    // layer's (I v)^+ when issuance can rescue), discounted with the layer
    // and replaced by the fresh envelope in the obstacle pass
    const double boundary0 = issuance_ ? v[0] : 0.0;

    // advect: sample the foot x + mu dt
    for (int i = 0; i < n; ++i) {
        const int idx = i + shift_;
        if (idx >= n - 1) {
            const double over = (idx - (n - 1) + frac_) * h_;
            buf_y_[i] = v[n - 1] + g * over;
        } else if (idx < 0) {
            buf_y_[i] = v[0];
        } else {
            buf_y_[i] = (1.0 - frac_) * v[idx] + frac_ * v[idx + 1];
        }
    }

    // diffusion sub-step: explicit part into v, implicit solve in place
    if (c_exp_ > 0.0) {
        for (int i = 1; i < n - 1; ++i)
            v[i] = buf_y_[i] +
                   c_exp_ * (buf_y_[i - 1] - 2.0 * buf_y_[i] + buf_y_[i + 1]);
        v[n - 1] = buf_y_[n - 1] +
                   c_exp_ * (buf_y_[n - 2] - buf_y_[n - 1] + h_ * g);
    } else {
        std::copy(buf_y_.begin() + 1, buf_y_.end(), v.begin() + 1);
    }
    v[0] = boundary0;
    if (c_imp_ > 0.0) {
        v[n - 1] += c_imp_ * h_ * g;
        v[0] *= thomas_inv_diag_[0];
        for (int i = 1; i < n; ++i)
            v[i] = (v[i] + c_imp_ * v[i - 1]) * thomas_inv_diag_[i];
        for (int i = n - 2; i >= 0; --i) v[i] -= thomas_upper_[i] * v[i + 1];
    }

    for (int i = 0; i < n; ++i) v[i] *= disc_;

    if (issuance_) apply_obstacle(v);
}

ValueFn1D PeriodSolver1D::solve(const ValueFn1D& phi) {
    return solve(phi, LayerObserver{});
}

ValueFn1D PeriodSolver1D::solve(const ValueFn1D& phi, const LayerObserver& obs) {
    if (!(phi.grid == grid_))
        throw std::invalid_argument("value function grid does not match the solver");
    activity_ = IssuanceActivity{};
    std::vector<double> work = phi.v;
    for (int j = 1; j <= cfg_.n_t; ++j) {
        step(work, (j - 1) * dt_);
        if (obs) obs(j, j * dt_, work);
    }
    return {grid_, std::move(work)};
}

ValueFn1D step_one_dt(const ValueFn1D& v, double t, const ModelParams& p,
                      const SchemeConfig& cfg, bool issuance_enabled) {
    PeriodSolver1D solver(p, v.grid, cfg, issuance_enabled);
    if (t + solver.dt() > p.period * (1.0 + 1e-12))
        throw std::invalid_argument("step would pass the end of the period");
    std::vector<double> work = v.v;
    solver.step(work, t);
    return {v.grid, std::move(work)};
}

ValueFn1D solve_one_period_1d(const ValueFn1D& phi, const ModelParams& p,
                              const SchemeConfig& cfg, bool issuance_enabled) {
    PeriodSolver1D solver(p, phi.grid, cfg, issuance_enabled);
    return solver.solve(phi);
}

}  // namespace perdiv
