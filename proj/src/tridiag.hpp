#pragma once

#include <vector>

namespace perdiv::detail {

// Prefactored Thomas solve for the constant tridiagonal systems the period
// solvers assemble. Rows are (sub[i], diag[i], sup[i]); the factorization
// stores sup[i]/denom[i] and 1/denom[i]. Every weight stays non-negative for
// the matrices used here (M-matrices), so forward and backward substitution
// are monotone in the right-hand side, in floating point as well.
struct TridiagFactors {
    std::vector<double> upper;     // sup[i] / denom[i]
    std::vector<double> inv_diag;  // 1 / denom[i]
    std::vector<double> sub;       // sub[i] (kept for the forward sweep)
};

inline TridiagFactors factor_tridiag(const std::vector<double>& sub,
                                     const std::vector<double>& diag,
                                     const std::vector<double>& sup) {
    const size_t n = diag.size();
    TridiagFactors f;
    f.upper.resize(n);
    f.inv_diag.resize(n);
    f.sub = sub;
    double denom = diag[0];
    f.inv_diag[0] = 1.0 / denom;
    f.upper[0] = sup[0] / denom;
    for (size_t i = 1; i < n; ++i) {
        denom = diag[i] - sub[i] * f.upper[i - 1];
        f.inv_diag[i] = 1.0 / denom;
        f.upper[i] = sup[i] / denom;
    }
    return f;
}

// In-place solve; rhs becomes the solution.
inline void solve_tridiag(const TridiagFactors& f, double* rhs, int n) {
    rhs[0] *= f.inv_diag[0];
    for (int i = 1; i < n; ++i)
        rhs[i] = (rhs[i] - f.sub[i] * rhs[i - 1]) * f.inv_diag[i];
    for (int i = n - 2; i >= 0; --i) rhs[i] -= f.upper[i] * rhs[i + 1];
}

// Strided gather/scatter variant for the mu-direction sweeps.
inline void solve_tridiag_strided(const TridiagFactors& f, double* base,
                                  int n, int stride,
                                  std::vector<double>& scratch) {
    scratch.resize(n);
    for (int i = 0; i < n; ++i) scratch[i] = base[static_cast<size_t>(i) * stride];
    solve_tridiag(f, scratch.data(), n);
    for (int i = 0; i < n; ++i) base[static_cast<size_t>(i) * stride] = scratch[i];
}

}  // namespace perdiv::detail
