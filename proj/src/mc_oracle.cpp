#include "perdiv/mc_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

namespace perdiv {

namespace {

constexpr long kBlock = 4096;  // fixed reduction granularity

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct PathRng {
    std::mt19937_64 normals;
    std::mt19937_64 uniforms;
    std::normal_distribution<double> gauss{0.0, 1.0};
    std::uniform_real_distribution<double> uni{0.0, 1.0};

    PathRng(uint64_t seed, long path)
        : normals(splitmix64(seed ^ splitmix64(2 * static_cast<uint64_t>(path)))),
          uniforms(splitmix64(seed ^ splitmix64(2 * static_cast<uint64_t>(path) + 1))) {}

    double z() { return gauss(normals); }
    double u() { return uni(uniforms); }
};

// true if the path ruins strictly inside the step (both endpoints positive)
bool bridge_hit(PathRng& rng, double a, double b, double sig2dt) {
    if (sig2dt <= 0.0) return false;
    const double expo = -2.0 * a * b / sig2dt;
    if (expo < -40.0) return false;  // crossing probability below 4e-18
    return rng.u() < std::exp(expo);
}

struct SliceRule {
    double barrier = 0.0;
    double liquidation = std::nan("");
    bool fully_liquidating = false;
};

SliceRule rule_at(const Policy& pol, double mu) {
    SliceRule r;
    const int m = pol.n_slices();
    if (pol.mu_nodes.empty() || m == 1) {
        r.barrier = pol.dividend_barrier[0];
        r.liquidation = pol.liquidation_barrier[0];
        r.fully_liquidating = pol.fully_liquidating[0] != 0;
        return r;
    }
    // nearest mu slice; barriers are step functions of the slice index
    int j = 0;
    double best = std::abs(pol.mu_nodes[0] - mu);
    for (int k = 1; k < m; ++k) {
        const double d = std::abs(pol.mu_nodes[k] - mu);
        if (d < best) { best = d; j = k; }
    }
    r.barrier = pol.dividend_barrier[j];
    r.liquidation = pol.liquidation_barrier[j];
    r.fully_liquidating = pol.fully_liquidating[j] != 0;
    return r;
}

struct PathAccum {
    double sum = 0.0;
    double sum_sq = 0.0;
    long n = 0;
    void add(double v) { sum += v; sum_sq += v * v; ++n; }
    void merge(const PathAccum& o) { sum += o.sum; sum_sq += o.sum_sq; n += o.n; }
};

McEstimate finalize(const PathAccum& acc) {
    McEstimate est;
    est.n_paths = acc.n;
    est.value = acc.sum / acc.n;
    const double var =
        std::max(0.0, acc.sum_sq / acc.n - est.value * est.value);
    est.std_error = std::sqrt(var / acc.n);
    return est;
}

// Deterministic block-parallel map-reduce over paths.
template <typename PathFn>
McEstimate run_paths(long n_paths, int n_threads, const PathFn& fn) {
    const long n_blocks = (n_paths + kBlock - 1) / kBlock;
    std::vector<PathAccum> blocks(n_blocks);
    std::atomic<long> next{0};
    auto worker = [&] {
        for (;;) {
            const long b = next.fetch_add(1);
            if (b >= n_blocks) return;
            PathAccum acc;
            const long lo = b * kBlock;
            const long hi = std::min(n_paths, lo + kBlock);
            for (long path = lo; path < hi; ++path) acc.add(fn(path));
            blocks[b] = acc;
        }
    };
    const int workers = std::max(1, n_threads);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    PathAccum total;
    for (const auto& b : blocks) total.merge(b);
    return finalize(total);
}

double slope_one_extend(const ValueFn1D& phi, double x) {
    if (x >= phi.grid.x_max) return phi.v.back() + (x - phi.grid.x_max);
    return phi(x);
}

double bilinear_extend(const ValueFn2D& phi, double x, double mu) {
    const auto& g = phi.grid;
    const double hm = g.mu_spacing();
    double s = (mu - g.mu_min) / hm;
    int j = std::clamp(static_cast<int>(std::floor(s)), 0, g.n_mu - 2);
    double wm = std::clamp(s - j, 0.0, 1.0);
    auto row_val = [&](int jj) {
        const double* row = phi.slice(jj);
        const double h = g.reserve.spacing();
        if (x >= g.reserve.x_max) return row[g.reserve.n_x - 1] + (x - g.reserve.x_max);
        if (x <= 0.0) return row[0];
        const double t = x / h;
        const int i = std::min(static_cast<int>(t), g.reserve.n_x - 2);
        const double w = t - i;
        return (1.0 - w) * row[i] + w * row[i + 1];
    };
    return (1.0 - wm) * row_val(j) + wm * row_val(j + 1);
}

}  // namespace

void McConfig::validate(const ModelParams& p) const {
    if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
    if (!(dt > 0.0 && dt <= p.period))
        throw std::invalid_argument("dt must lie in (0, period]");
    if (horizon_periods < 1)
        throw std::invalid_argument("horizon_periods must be >= 1");
    if (!(p.sigma >= 0.0) || !(p.rho > 0.0) || !(p.period > 0.0))
        throw std::invalid_argument("mc oracle needs sigma >= 0, rho > 0, period > 0");
}

int horizon_for_bias(const ModelParams& p, double x_max, double bias_target) {
    const double scale = x_max + a_star(p);
    return static_cast<int>(
               std::ceil(std::log(scale / bias_target) / (p.rho * p.period))) +
           1;
}

double ou_step_mean(const OUParams& ou, double mu, double dt) {
    const double e = std::exp(-ou.k * dt);
    return ou.mu_bar + (mu - ou.mu_bar) * e;
}

double ou_step_sd(const OUParams& ou, double dt) {
    return ou.sigma_tilde * std::sqrt(-std::expm1(-2.0 * ou.k * dt) / (2.0 * ou.k));
}

McEstimate evaluate_policy(const Policy& pol, double x0, const ModelParams& p,
                           const McConfig& mc) {
    mc.validate(p);
    pol.validate();
    const int steps = std::max(1, static_cast<int>(std::lround(p.period / mc.dt)));
    const double dt = p.period / steps;
    const double sqdt = std::sqrt(dt);
    const double sig2dt = p.sigma * p.sigma * dt;
    const CostFn cost = make_cost(p);
    const bool has_schedule = pol.has_issuance_schedule();

    auto one_path = [&](long path) -> double {
        PathRng rng(mc.seed, path);
        double pv = 0.0;
        double X = x0;
        for (int n = 0; n < mc.horizon_periods; ++n) {
            const double disc_n = std::exp(-p.rho * n * p.period);
            const SliceRule r = rule_at(pol, 0.0);
            if (r.fully_liquidating ||
                (!std::isnan(r.liquidation) && X < r.liquidation)) {
                pv += disc_n * X;
                return pv;
            }
            if (X > r.barrier) {
                pv += disc_n * (X - r.barrier);
                X = r.barrier;
            }
            for (int s = 0; s < steps; ++s) {
                const double Z = (p.sigma > 0.0) ? rng.z() : 0.0;
                const double Xn = X + p.mu * dt + p.sigma * sqdt * Z;
                const double t_in = (s + 1) * dt;
                const double t_abs = n * p.period + t_in;
                if (Xn <= 0.0 ||
                    (mc.bridge_ruin && X > 0.0 && Xn > 0.0 &&
                     bridge_hit(rng, X, Xn, sig2dt))) {
                    const double target =
                        has_schedule ? pol.issuance_target_at(t_in, 0) : std::nan("");
                    if (std::isnan(target) || target <= 0.0) return pv;  // ruin
                    pv -= std::exp(-p.rho * t_abs) * cost(target);
                    X = target;
                } else {
                    X = Xn;
                }
            }
        }
        return pv;
    };
    return run_paths(mc.n_paths, mc.n_threads, one_path);
}

McEstimate evaluate_policy(const Policy& pol, double x0, double mu0,
                           const ModelParams& p, const OUParams& ou,
                           const McConfig& mc) {
    mc.validate(p);
    ou.validate();
    pol.validate();
    const int steps = std::max(1, static_cast<int>(std::lround(p.period / mc.dt)));
    const double dt = p.period / steps;
    const double sqdt = std::sqrt(dt);
    const double sig2dt = p.sigma * p.sigma * dt;
    const double ou_e = std::exp(-ou.k * dt);
    const double ou_sd = ou_step_sd(ou, dt);
    const double c1 = ou.corr;
    const double c2 = std::sqrt(1.0 - ou.corr * ou.corr);
    const CostFn cost = make_cost(p);
    const bool has_schedule = pol.has_issuance_schedule();

    auto one_path = [&](long path) -> double {
        PathRng rng(mc.seed, path);
        double pv = 0.0;
        double X = x0;
        double mu = mu0;
        for (int n = 0; n < mc.horizon_periods; ++n) {
            const double disc_n = std::exp(-p.rho * n * p.period);
            const SliceRule r = rule_at(pol, mu);
            if (r.fully_liquidating ||
                (!std::isnan(r.liquidation) && X < r.liquidation)) {
                pv += disc_n * X;
                return pv;
            }
            if (X > r.barrier) {
                pv += disc_n * (X - r.barrier);
                X = r.barrier;
            }
            for (int s = 0; s < steps; ++s) {
                const double z1 = rng.z();
                const double z2 = c1 * z1 + c2 * rng.z();
                const double Xn = X + mu * dt + p.sigma * sqdt * z1;
                mu = ou.mu_bar + (mu - ou.mu_bar) * ou_e + ou_sd * z2;
                const double t_in = (s + 1) * dt;
                const double t_abs = n * p.period + t_in;
                if (Xn <= 0.0 ||
                    (mc.bridge_ruin && X > 0.0 && Xn > 0.0 &&
                     bridge_hit(rng, X, Xn, sig2dt))) {
                    const double target =
                        has_schedule ? pol.issuance_target_at(t_in, 0) : std::nan("");
                    if (std::isnan(target) || target <= 0.0) return pv;
                    pv -= std::exp(-p.rho * t_abs) * cost(target);
                    X = target;
                } else {
                    X = Xn;
                }
            }
        }
        return pv;
    };
    return run_paths(mc.n_paths, mc.n_threads, one_path);
}

McEstimate mc_one_period(const ValueFn1D& phi, double x0, const ModelParams& p,
                         double horizon, const McConfig& mc) {
    mc.validate(p);
    if (!(horizon > 0.0 && horizon <= p.period))
        throw std::invalid_argument("horizon must lie in (0, period]");
    const int steps = std::max(1, static_cast<int>(std::ceil(horizon / mc.dt - 1e-12)));
    const double dt = horizon / steps;
    const double sqdt = std::sqrt(dt);
    const double sig2dt = p.sigma * p.sigma * dt;
    const double disc = std::exp(-p.rho * horizon);

    auto one_path = [&](long path) -> double {
        PathRng rng(mc.seed, path);
        double X = x0;
        for (int s = 0; s < steps; ++s) {
            const double Xn = X + p.mu * dt + p.sigma * sqdt * rng.z();
            if (Xn <= 0.0) return 0.0;
            if (mc.bridge_ruin && X > 0.0 && bridge_hit(rng, X, Xn, sig2dt))
                return 0.0;
            X = Xn;
        }
        return disc * slope_one_extend(phi, X);
    };
    return run_paths(mc.n_paths, mc.n_threads, one_path);
}

McEstimate mc_one_period(const ValueFn2D& phi, double x0, double mu0,
                         const ModelParams& p, const OUParams& ou,
                         double horizon, const McConfig& mc) {
    mc.validate(p);
    ou.validate();
    if (!(horizon > 0.0 && horizon <= p.period))
        throw std::invalid_argument("horizon must lie in (0, period]");
    const int steps = std::max(1, static_cast<int>(std::ceil(horizon / mc.dt - 1e-12)));
    const double dt = horizon / steps;
    const double sqdt = std::sqrt(dt);
    const double sig2dt = p.sigma * p.sigma * dt;
    const double ou_e = std::exp(-ou.k * dt);
    const double ou_sd = ou_step_sd(ou, dt);
    const double c1 = ou.corr;
    const double c2 = std::sqrt(1.0 - ou.corr * ou.corr);
    const double disc = std::exp(-p.rho * horizon);

    auto one_path = [&](long path) -> double {
        PathRng rng(mc.seed, path);
        double X = x0;
        double mu = mu0;
        for (int s = 0; s < steps; ++s) {
            const double z1 = rng.z();
            const double z2 = c1 * z1 + c2 * rng.z();
            const double Xn = X + mu * dt + p.sigma * sqdt * z1;
            mu = ou.mu_bar + (mu - ou.mu_bar) * ou_e + ou_sd * z2;
            if (Xn <= 0.0) return 0.0;
            if (mc.bridge_ruin && X > 0.0 && bridge_hit(rng, X, Xn, sig2dt))
                return 0.0;
            X = Xn;
        }
        return disc * bilinear_extend(phi, X, mu);
    };
    return run_paths(mc.n_paths, mc.n_threads, one_path);
}

}  // namespace perdiv
