#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "perdiv/model.hpp"

namespace testutil {

// Grids whose spacing is a power of two keep every payout/issuance candidate
// sum exact in double precision, so brute-force oracles can assert bitwise
// equality instead of hiding behind tolerances.
inline perdiv::ReserveGrid dyadic_grid(int n_x, int log2_inv_h = 3) {
    const double h = std::ldexp(1.0, -log2_inv_h);
    return perdiv::ReserveGrid{(n_x - 1) * h, n_x};
}

// Values of the form k * 2^-20 with |k| bounded; sums and differences with
// the dyadic grid nodes stay exact.
inline std::vector<double> dyadic_values(int n, std::mt19937& rng,
                                         double lo = -2.0, double hi = 6.0) {
    std::uniform_int_distribution<long> d(
        static_cast<long>(lo * (1 << 20)), static_cast<long>(hi * (1 << 20)));
    std::vector<double> v(n);
    for (auto& x : v) x = std::ldexp(static_cast<double>(d(rng)), -20);
    return v;
}

inline std::vector<double> real_values(int n, std::mt19937& rng,
                                       double lo = -1.0, double hi = 3.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

// A random member of the cone x <= phi <= x + A with non-decreasing excess.
inline perdiv::ValueFn1D random_cone_fn(const perdiv::ReserveGrid& g, double A,
                                        std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> inc(g.n_x);
    double total = 0.0;
    for (auto& x : inc) {
        x = u(rng);
        total += x;
    }
    perdiv::ValueFn1D f{g, std::vector<double>(g.n_x)};
    double acc = 0.0;
    const double start = u(rng) * A * 0.25;
    for (int i = 0; i < g.n_x; ++i) {
        if (i > 0) acc += inc[i] / total * (A - start);
        f.v[i] = g.node(i) + start + acc * 0.999;
    }
    return f;
}

inline double sup_diff(const std::vector<double>& a,
                       const std::vector<double>& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace testutil
