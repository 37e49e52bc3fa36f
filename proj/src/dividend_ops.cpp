#include "perdiv/dividend_ops.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace perdiv {

namespace kernels {

void payout_sweep(const double* phi, const double* xs, int n, double* out) {
    // out_i = max(phi_i, out_{i-1} + (x_i - x_{i-1})); the recurrence makes a
    // second application reproduce the first bit-for-bit.
    double prev = phi[0];
    double xprev = xs[0];
    out[0] = prev;
    for (int i = 1; i < n; ++i) {
        const double cand = prev + (xs[i] - xprev);
        prev = std::max(phi[i], cand);
        xprev = xs[i];
        out[i] = prev;
    }
}

int issuance_k_cap(double zeta_max, double h) {
    const double k = std::floor(zeta_max / h + 1e-9);
    return std::max(1, static_cast<int>(k));
}

double issuance_envelope_node(const double* phi, int n, double h, int k_cap,
                              const CostFn& cost, int i) {
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= k_cap; ++k) {
        const int j = i + k;
        const double pj = (j < n) ? phi[j] : phi[n - 1] + (j - (n - 1)) * h;
        const double val = pj - cost(k * h);
        if (val > best) best = val;
    }
    return best;
}

void issuance_sweep(const double* phi, int n, double h, int k_cap,
                    double lambda_f, double lambda_p, double* scratch,
                    double* out) {
    const double slope = 1.0 + lambda_p;
    // psi_j = phi_j - (1+lambda_p) x_j; env_i = max_{i<j<=i+k} psi_j
    //         + (1+lambda_p) x_i - lambda_f.
    // Beyond the grid psi is non-increasing, so interior nodes never prefer a
    // ghost candidate over node n-1; only the top node looks past the edge.
    for (int j = 0; j < n; ++j) scratch[j] = phi[j] - slope * (j * h);

    if (k_cap >= n - 1) {
        double suffix = -std::numeric_limits<double>::infinity();
        for (int i = n - 1; i >= 0; --i) {
            out[i] = (i == n - 1)
                         ? phi[n - 1] - lambda_f - lambda_p * h
                         : suffix + slope * (i * h) - lambda_f;
            suffix = std::max(suffix, scratch[i]);
        }
        return;
    }

    // Sliding-window maximum over [i+1, min(i+k_cap, n-1)].
    std::deque<int> window;
    for (int i = n - 1; i >= 0; --i) {
        const int hi = std::min(i + k_cap, n - 1);
        const int entering = i + 1;  // index newly inside the window
        if (entering <= n - 1) {
            while (!window.empty() && scratch[window.back()] <= scratch[entering])
                window.pop_back();
            window.push_back(entering);
        }
        while (!window.empty() && window.front() > hi) window.pop_front();
        if (window.empty()) {
            // only ghost candidates (top node): the first offset is best
            out[i] = phi[n - 1] - lambda_f - lambda_p * h;
        } else {
            out[i] = scratch[window.front()] + slope * (i * h) - lambda_f;
        }
    }
}

}  // namespace kernels

ValueFn1D payout_envelope(const ValueFn1D& phi) {
    ValueFn1D out{phi.grid, std::vector<double>(phi.grid.n_x)};
    const auto xs = phi.grid.nodes();
    kernels::payout_sweep(phi.v.data(), xs.data(), phi.grid.n_x, out.v.data());
    return out;
}

ValueFn2D payout_envelope(const ValueFn2D& phi) {
    ValueFn2D out{phi.grid, std::vector<double>(phi.v.size())};
    const auto xs = phi.grid.reserve.nodes();
    const int n = phi.grid.reserve.n_x;
    for (int j = 0; j < phi.grid.n_mu; ++j)
        kernels::payout_sweep(phi.slice(j), xs.data(), n,
                              out.v.data() + static_cast<size_t>(j) * n);
    return out;
}

ValueFn1D fixed_barrier_payout(const ValueFn1D& phi, double barrier) {
    if (!(barrier >= 0.0 && barrier <= phi.grid.x_max))
        throw std::domain_error("barrier outside the grid domain");
    const int n = phi.grid.n_x;
    const double h = phi.grid.spacing();
    const int b = std::min(n - 1, static_cast<int>(std::lround(barrier / h)));
    ValueFn1D out{phi.grid, phi.v};
    for (int i = b + 1; i < n; ++i)
        out.v[i] = phi.v[b] + (phi.grid.node(i) - phi.grid.node(b));
    return out;
}

ValueFn1D issuance_envelope(const ValueFn1D& phi, const ModelParams& p0) {
    const ModelParams p = resolve_zeta_max(p0, phi.grid);
    const int n = phi.grid.n_x;
    const double h = phi.grid.spacing();
    const int k_cap = kernels::issuance_k_cap(p.zeta_max, h);
    const CostFn cost = make_cost(p);
    ValueFn1D out{phi.grid, std::vector<double>(n)};
    for (int i = 0; i < n; ++i)
        out.v[i] = kernels::issuance_envelope_node(phi.v.data(), n, h, k_cap, cost, i);
    return out;
}

ValueFn2D issuance_envelope(const ValueFn2D& phi, const ModelParams& p0) {
    const ModelParams p = resolve_zeta_max(p0, phi.grid.reserve);
    const int n = phi.grid.reserve.n_x;
    const double h = phi.grid.reserve.spacing();
    const int k_cap = kernels::issuance_k_cap(p.zeta_max, h);
    const CostFn cost = make_cost(p);
    ValueFn2D out{phi.grid, std::vector<double>(phi.v.size())};
    for (int j = 0; j < phi.grid.n_mu; ++j) {
        const double* src = phi.slice(j);
        double* dst = out.v.data() + static_cast<size_t>(j) * n;
        for (int i = 0; i < n; ++i)
            dst[i] = kernels::issuance_envelope_node(src, n, h, k_cap, cost, i);
    }
    return out;
}

IssuanceChoice issuance_best(const ValueFn1D& phi, const ModelParams& p0,
                             int node) {
    const ModelParams p = resolve_zeta_max(p0, phi.grid);
    const int n = phi.grid.n_x;
    if (node < 0 || node >= n) throw std::domain_error("node outside the grid");
    const double h = phi.grid.spacing();
    const int k_cap = kernels::issuance_k_cap(p.zeta_max, h);
    const CostFn cost = make_cost(p);
    double best = -std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (int k = 1; k <= k_cap; ++k) {
        const int j = node + k;
        const double pj = (j < n) ? phi.v[j] : phi.v[n - 1] + (j - (n - 1)) * h;
        const double val = pj - cost(k * h);
        if (val > best) { best = val; best_k = k; }  // ascending k: ties keep the smallest
    }
    return {best, best_k * h};
}

std::optional<double> issuance_target(const ValueFn1D& phi,
                                      const ModelParams& p0, int node) {
    const IssuanceChoice best = issuance_best(phi, p0, node);
    if (best.value > phi.v[node]) return best.zeta;
    return std::nullopt;
}

namespace {

struct SliceBarriers {
    double dividend = 0.0;
    double liquidation = std::numeric_limits<double>::quiet_NaN();
    bool fully_liquidating = false;
};

SliceBarriers slice_barriers(const double* phi, const ReserveGrid& g,
                             double liq_tol) {
    const int n = g.n_x;
    int argmax = 0;
    double best = phi[0] - g.node(0);
    for (int i = 1; i < n; ++i) {
        const double e = phi[i] - g.node(i);
        if (e > best) { best = e; argmax = i; }
    }
    SliceBarriers out;
    out.dividend = g.node(argmax);
    out.fully_liquidating = (argmax == 0);
    if (argmax > 0) {
        // payout-to-zero region: prefix max of phi(y)-y pinned at phi(0)
        const double base = phi[0];
        double prefmax = base;
        int last = 0;
        for (int i = 1; i < argmax; ++i) {
            prefmax = std::max(prefmax, phi[i] - g.node(i));
            if (prefmax > base + liq_tol) break;
            last = i;
        }
        if (last >= 1) out.liquidation = g.node(last);
    }
    return out;
}

}  // namespace

Policy extract_barriers(const ValueFn1D& phi, double liq_tol) {
    Policy pol;
    const auto sb = slice_barriers(phi.v.data(), phi.grid, liq_tol);
    pol.dividend_barrier = {sb.dividend};
    pol.liquidation_barrier = {sb.liquidation};
    pol.fully_liquidating = {static_cast<char>(sb.fully_liquidating)};
    return pol;
}

Policy extract_barriers(const ValueFn2D& phi, double liq_tol) {
    Policy pol;
    const int n_mu = phi.grid.n_mu;
    pol.mu_nodes.resize(n_mu);
    pol.dividend_barrier.resize(n_mu);
    pol.liquidation_barrier.resize(n_mu);
    pol.fully_liquidating.resize(n_mu);
    for (int j = 0; j < n_mu; ++j) {
        pol.mu_nodes[j] = phi.grid.mu_node(j);
        const auto sb = slice_barriers(phi.slice(j), phi.grid.reserve, liq_tol);
        pol.dividend_barrier[j] = sb.dividend;
        pol.liquidation_barrier[j] = sb.liquidation;
        pol.fully_liquidating[j] = static_cast<char>(sb.fully_liquidating);
    }
    return pol;
}

}  // namespace perdiv
