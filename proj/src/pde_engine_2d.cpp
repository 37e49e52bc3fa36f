#include <algorithm>
#include <cmath>

#include "perdiv/dividend_ops.hpp"
#include "perdiv/pde_engine.hpp"
#include "tridiag.hpp"

namespace perdiv {

namespace {
constexpr double kActivityTol = 1e-11;
}

PeriodSolver2D::PeriodSolver2D(const ModelParams& p, const OUParams& ou,
                               const StateGrid2D& g, const SchemeConfig& cfg,
                               bool issuance_enabled)
    : p_(resolve_zeta_max(p, g.reserve)),
      ou_(ou),
      grid_(g),
      cfg_(cfg),
      issuance_(issuance_enabled) {
    grid_.validate();
    // the drift axis carries per-slice values, mu here only enters a_star
    ModelParams check = p_;
    check.mu = std::max(0.0, p_.mu);
    check.validate();
    ou_.validate();
    cfg_.validate();
    const auto rep = check_monotone(cfg_, p_, ou_, grid_);
    if (rep.hard_violation)
        throw std::invalid_argument("scheme not monotone: " + rep.binding_constraint);

    const int n = grid_.reserve.n_x;
    const int m = grid_.n_mu;
    h_ = grid_.reserve.spacing();
    hm_ = grid_.mu_spacing();
    dt_ = p_.period / cfg_.n_t;
    disc_ = std::exp(-p_.rho * dt_);
    cx_imp_ = cfg_.theta * dt_ * p_.sigma * p_.sigma / (2.0 * h_ * h_);
    cx_exp_ = (1.0 - cfg_.theta) * dt_ * p_.sigma * p_.sigma / (2.0 * h_ * h_);
    cm_imp_ = cfg_.theta * dt_ * ou_.sigma_tilde * ou_.sigma_tilde / (2.0 * hm_ * hm_);
    cm_exp_ = (1.0 - cfg_.theta) * dt_ * ou_.sigma_tilde * ou_.sigma_tilde /
              (2.0 * hm_ * hm_);
    cross_ = ou_.corr * p_.sigma * ou_.sigma_tilde * dt_ / (4.0 * h_ * hm_);
    k_cap_ = kernels::issuance_k_cap(p_.zeta_max, h_);

    x_shift_.resize(m);
    x_frac_.resize(m);
    mu_lo_.resize(m);
    mu_frac_.resize(m);
    for (int j = 0; j < m; ++j) {
        const double mu_j = grid_.mu_node(j);
        const double off = mu_j * dt_ / h_;
        const double fl = std::floor(off);
        x_shift_[j] = static_cast<int>(fl);
        x_frac_[j] = off - fl;
        // mean-reversion foot, clamped inside the mu domain
        double fm = mu_j + ou_.k * (ou_.mu_bar - mu_j) * dt_;
        fm = std::clamp(fm, grid_.mu_min, grid_.mu_max);
        int jl = static_cast<int>(std::floor((fm - grid_.mu_min) / hm_));
        jl = std::clamp(jl, 0, m - 2);
        mu_lo_[j] = jl;
        mu_frac_[j] = std::clamp((fm - grid_.mu_node(jl)) / hm_, 0.0, 1.0);
    }

    if (cx_imp_ > 0.0) {
        std::vector<double> sub(n, -cx_imp_), diag(n, 1.0 + 2.0 * cx_imp_),
            sup(n, -cx_imp_);
        sub[0] = 0.0;
        diag[0] = 1.0;
        sup[0] = 0.0;
        diag[n - 1] = 1.0 + cx_imp_;
        sup[n - 1] = 0.0;
        const auto f = detail::factor_tridiag(sub, diag, sup);
        tx_upper_ = f.upper;
        tx_inv_diag_ = f.inv_diag;
    }
    if (cm_imp_ > 0.0) {
        std::vector<double> sub(m, -cm_imp_), diag(m, 1.0 + 2.0 * cm_imp_),
            sup(m, -cm_imp_);
        sub[0] = 0.0;
        diag[0] = 1.0;  // diffusion dropped at the lower mu edge
        sup[0] = 0.0;
        sub[m - 1] = -2.0 * cm_imp_;  // mirrored ghost at the upper edge
        diag[m - 1] = 1.0 + 2.0 * cm_imp_;
        sup[m - 1] = 0.0;
        const auto f = detail::factor_tridiag(sub, diag, sup);
        tm_upper_ = f.upper;
        tm_inv_diag_ = f.inv_diag;
    }

    buf_y_.resize(static_cast<size_t>(n) * m);
    buf_col_.resize(m);
    buf_env_.resize(n);
    buf_psi_.resize(n);
    buf_b0_.resize(m);
}

void PeriodSolver2D::apply_obstacle(std::vector<double>& v) {
    const int n = grid_.reserve.n_x;
    const int m = grid_.n_mu;
    ++activity_.layers_total;
    bool boundary_hit = false;
    if (cfg_.obstacle_mode == ObstacleMode::boundary_only) {
        const CostFn cost = make_cost(p_);
        for (int j = 0; j < m; ++j) {
            double* row = v.data() + static_cast<size_t>(j) * n;
            const double env0 =
                kernels::issuance_envelope_node(row, n, h_, k_cap_, cost, 0);
            row[0] = std::max(env0, 0.0);
            if (env0 > 0.0) boundary_hit = true;
        }
        if (boundary_hit) ++activity_.layers_with_boundary;
        return;
    }
    for (int j = 0; j < m; ++j) {
        double* row = v.data() + static_cast<size_t>(j) * n;
        kernels::issuance_sweep(row, n, h_, k_cap_, p_.lambda_f, p_.lambda_p,
                                buf_psi_.data(), buf_env_.data());
        if (buf_env_[0] > kActivityTol) boundary_hit = true;
        row[0] = std::max(buf_env_[0], 0.0);
        for (int i = 1; i < n; ++i) {
            if (buf_env_[i] > row[i]) {
                const double gain = buf_env_[i] - row[i];
                if (gain > kActivityTol) {
                    activity_.any_interior = true;
                    if (gain > activity_.max_interior_gain) {
                        activity_.max_interior_gain = gain;
                        activity_.max_interior_gain_x = i * h_;
                    }
                }
                row[i] = buf_env_[i];
            }
        }
    }
    if (boundary_hit) ++activity_.layers_with_boundary;
}

void PeriodSolver2D::step(std::vector<double>& v, double tau) {
    const int n = grid_.reserve.n_x;
    const int m = grid_.n_mu;
    const double g = std::exp(-p_.rho * tau);
    // lagged x = 0 lateral values, one per slice (see the 1-D solver)
    if (issuance_) {
        for (int j = 0; j < m; ++j)
            buf_b0_[j] = v[static_cast<size_t>(j) * n];
    } else {
        std::fill(buf_b0_.begin(), buf_b0_.end(), 0.0);
    }

    // advect along both characteristics (bilinear, clamped at x = 0, Neumann
    // slope extension past x_max)
    for (int j = 0; j < m; ++j) {
        const int sx = x_shift_[j];
        const double wx = x_frac_[j];
        const int jl = mu_lo_[j];
        const double wm = mu_frac_[j];
        const double* rowA = v.data() + static_cast<size_t>(jl) * n;
        const double* rowB = rowA + n;
        double* dst = buf_y_.data() + static_cast<size_t>(j) * n;
        for (int i = 0; i < n; ++i) {
            const int idx = i + sx;
            double a, b;
            if (idx >= n - 1) {
                const double over = (idx - (n - 1) + wx) * h_;
                a = rowA[n - 1] + g * over;
                b = rowB[n - 1] + g * over;
            } else if (idx < 0) {
                a = rowA[0];
                b = rowB[0];
            } else {
                a = (1.0 - wx) * rowA[idx] + wx * rowA[idx + 1];
                b = (1.0 - wx) * rowB[idx] + wx * rowB[idx + 1];
            }
            dst[i] = (1.0 - wm) * a + wm * b;
        }
    }

    // explicit mixed derivative (zero in all calibrated runs)
    if (cross_ != 0.0) {
        for (int j = 1; j < m - 1; ++j) {
            const double* up = v.data() + static_cast<size_t>(j + 1) * n;
            const double* dn = v.data() + static_cast<size_t>(j - 1) * n;
            double* dst = buf_y_.data() + static_cast<size_t>(j) * n;
            for (int i = 1; i < n - 1; ++i)
                dst[i] += cross_ * (up[i + 1] - up[i - 1] - dn[i + 1] + dn[i - 1]);
        }
    }

    // x diffusion per mu-slice
    for (int j = 0; j < m; ++j) {
        const double* y = buf_y_.data() + static_cast<size_t>(j) * n;
        double* row = v.data() + static_cast<size_t>(j) * n;
        if (cx_exp_ > 0.0) {
            for (int i = 1; i < n - 1; ++i)
                row[i] = y[i] + cx_exp_ * (y[i - 1] - 2.0 * y[i] + y[i + 1]);
            row[n - 1] = y[n - 1] + cx_exp_ * (y[n - 2] - y[n - 1] + h_ * g);
        } else {
            std::copy(y + 1, y + n, row + 1);
        }
        row[0] = buf_b0_[j];
        if (cx_imp_ > 0.0) {
            row[n - 1] += cx_imp_ * h_ * g;
            row[0] *= tx_inv_diag_[0];
            for (int i = 1; i < n; ++i)
                row[i] = (row[i] + cx_imp_ * row[i - 1]) * tx_inv_diag_[i];
            for (int i = n - 2; i >= 0; --i) row[i] -= tx_upper_[i] * row[i + 1];
        }
    }

    // mu diffusion per reserve column (column 0 is pinned at the ruin value)
    if (cm_imp_ > 0.0 || cm_exp_ > 0.0) {
        for (int i = 1; i < n; ++i) {
            double* base = v.data() + i;
            if (cm_exp_ > 0.0) {
                buf_col_.resize(m);
                for (int j = 0; j < m; ++j)
                    buf_col_[j] = base[static_cast<size_t>(j) * n];
                for (int j = 1; j < m - 1; ++j)
                    base[static_cast<size_t>(j) * n] =
                        buf_col_[j] + cm_exp_ * (buf_col_[j - 1] -
                                                 2.0 * buf_col_[j] +
                                                 buf_col_[j + 1]);
                base[static_cast<size_t>(m - 1) * n] =
                    buf_col_[m - 1] +
                    cm_exp_ * 2.0 * (buf_col_[m - 2] - buf_col_[m - 1]);
            }
            if (cm_imp_ > 0.0) {
                buf_col_.resize(m);
                for (int j = 0; j < m; ++j)
                    buf_col_[j] = base[static_cast<size_t>(j) * n];
                buf_col_[0] *= tm_inv_diag_[0];
                for (int j = 1; j < m - 1; ++j)
                    buf_col_[j] = (buf_col_[j] + cm_imp_ * buf_col_[j - 1]) *
                                  tm_inv_diag_[j];
                buf_col_[m - 1] = (buf_col_[m - 1] +
                                   2.0 * cm_imp_ * buf_col_[m - 2]) *
                                  tm_inv_diag_[m - 1];
                for (int j = m - 2; j >= 0; --j)
                    buf_col_[j] -= tm_upper_[j] * buf_col_[j + 1];
                for (int j = 0; j < m; ++j)
                    base[static_cast<size_t>(j) * n] = buf_col_[j];
            }
        }
    }

    for (double& x : v) x *= disc_;

    if (issuance_) apply_obstacle(v);
}

ValueFn2D PeriodSolver2D::solve(const ValueFn2D& phi) {
    if (!(phi.grid == grid_))
        throw std::invalid_argument("value function grid does not match the solver");
    activity_ = IssuanceActivity{};
    std::vector<double> work = phi.v;
    for (int j = 1; j <= cfg_.n_t; ++j) step(work, (j - 1) * dt_);
    return {grid_, std::move(work)};
}

ValueFn2D solve_one_period_2d(const ValueFn2D& phi, const ModelParams& p,
                              const OUParams& ou, const SchemeConfig& cfg,
                              bool issuance_enabled) {
    PeriodSolver2D solver(p, ou, phi.grid, cfg, issuance_enabled);
    return solver.solve(phi);
}

}  // namespace perdiv
