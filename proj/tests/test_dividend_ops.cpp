#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "perdiv/dividend_ops.hpp"
#include "test_util.hpp"

using namespace perdiv;

namespace {

// Exhaustive payout search: best over all node-valued payouts, written from
// the definition out(x) = x + max_{y<=x}(phi(y) - y).
std::vector<double> brute_payout(const ValueFn1D& phi) {
    const int n = phi.grid.n_x;
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (int j = 0; j <= i; ++j)
            best = std::max(best, phi.grid.node(i) + (phi.v[j] - phi.grid.node(j)));
        out[i] = std::max(best, phi.v[i]);
    }
    return out;
}

std::vector<double> brute_issuance(const ValueFn1D& phi, const ModelParams& p0) {
    const ModelParams p = resolve_zeta_max(p0, phi.grid);
    const int n = phi.grid.n_x;
    const double h = phi.grid.spacing();
    const int k_cap = kernels::issuance_k_cap(p.zeta_max, h);
    const CostFn cost = make_cost(p);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (int k = 1; k <= k_cap; ++k) {
            const int j = i + k;
            const double pj =
                (j < n) ? phi.v[j] : phi.v[n - 1] + (j - (n - 1)) * h;
            best = std::max(best, pj - cost(k * h));
        }
        out[i] = best;
    }
    return out;
}

}  // namespace

TEST_CASE("payout envelope on plain shapes") {
    ReserveGrid g{1.0, 21};
    SUBCASE("identity is a fixed point") {
        const auto d = payout_envelope(ValueFn1D::identity(g));
        for (int i = 0; i < g.n_x; ++i) CHECK(d.v[i] == g.node(i));
    }
    SUBCASE("constants pay everything") {
        ReserveGrid gd = testutil::dyadic_grid(17);
        ValueFn1D phi{gd, std::vector<double>(gd.n_x, 0.7)};
        const auto d = payout_envelope(phi);
        for (int i = 0; i < gd.n_x; ++i) CHECK(d.v[i] == 0.7 + gd.node(i));
    }
    SUBCASE("worked grid example") {
        ReserveGrid ge{2.0, 5};
        ValueFn1D phi{ge, {0.5, 1.0, 1.5, 1.5, 1.5}};
        const auto d = payout_envelope(phi);
        const std::vector<double> want{0.5, 1.0, 1.5, 2.0, 2.5};
        for (int i = 0; i < 5; ++i) CHECK(d.v[i] == want[i]);
    }
}

TEST_CASE("payout envelope matches exhaustive search exactly") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 62);
        ReserveGrid g = testutil::dyadic_grid(n, 2 + trial % 4);
        ValueFn1D phi{g, testutil::dyadic_values(n, rng)};
        const auto fast = payout_envelope(phi);
        const auto slow = brute_payout(phi);
        for (int i = 0; i < n; ++i) CHECK(fast.v[i] == slow[i]);
    }
}

TEST_CASE("payout envelope properties") {
    std::mt19937 rng(47);
    SUBCASE("idempotence is bitwise, any real data") {
        for (int trial = 0; trial < 40; ++trial) {
            const int n = 5 + static_cast<int>(rng() % 120);
            ReserveGrid g{0.01 + 3.0 * (trial + 1) / 7.0, n};
            ValueFn1D phi{g, testutil::real_values(n, rng)};
            const auto once = payout_envelope(phi);
            const auto twice = payout_envelope(once);
            for (int i = 0; i < n; ++i) CHECK(once.v[i] == twice.v[i]);
        }
    }
    SUBCASE("monotone in the argument, exactly") {
        for (int trial = 0; trial < 100; ++trial) {
            const int n = 4 + static_cast<int>(rng() % 40);
            ReserveGrid g{1.7, n};
            ValueFn1D lo{g, testutil::real_values(n, rng)};
            ValueFn1D hi = lo;
            std::uniform_real_distribution<double> u(0.0, 0.5);
            for (auto& x : hi.v) x += u(rng);
            const auto dlo = payout_envelope(lo);
            const auto dhi = payout_envelope(hi);
            for (int i = 0; i < n; ++i) CHECK(dlo.v[i] <= dhi.v[i]);
        }
    }
    SUBCASE("cash additivity on exact data") {
        ReserveGrid g = testutil::dyadic_grid(33);
        ValueFn1D phi{g, testutil::dyadic_values(g.n_x, rng)};
        const double c = std::ldexp(3.0, -4);
        ValueFn1D shifted = phi;
        for (auto& x : shifted.v) x += c;
        const auto a = payout_envelope(shifted);
        const auto b = payout_envelope(phi);
        for (int i = 0; i < g.n_x; ++i) CHECK(a.v[i] == b.v[i] + c);
    }
    SUBCASE("pays at least the reserve difference") {
        ReserveGrid g = testutil::dyadic_grid(49);
        ValueFn1D phi{g, testutil::dyadic_values(g.n_x, rng)};
        const auto d = payout_envelope(phi);
        for (int i = 0; i < g.n_x; ++i)
            for (int k = i + 1; k < g.n_x; ++k)
                CHECK(d.v[k] >= d.v[i] + (g.node(k) - g.node(i)));
        for (int i = 0; i < g.n_x; ++i) CHECK(d.v[i] >= phi.v[i]);
        CHECK(d.v[0] == phi.v[0]);
    }
}

TEST_CASE("fixed barrier payout") {
    ReserveGrid g{2.0, 5};
    ValueFn1D phi{g, std::vector<double>(5)};
    for (int i = 0; i < 5; ++i) {
        const double x = g.node(i);
        phi.v[i] = x + 0.2 * std::min(x, 1.0);
    }
    SUBCASE("two-branch evaluation") {
        const auto out = fixed_barrier_payout(phi, 1.0);
        const std::vector<double> want{0.0, 0.6, 1.2, 1.7, 2.2};
        for (int i = 0; i < 5; ++i)
            CHECK(out.v[i] == doctest::Approx(want[i]).epsilon(1e-14));
    }
    SUBCASE("barrier at the edge leaves phi alone") {
        const auto out = fixed_barrier_payout(phi, g.x_max);
        for (int i = 0; i < 5; ++i) CHECK(out.v[i] == phi.v[i]);
    }
    SUBCASE("zero barrier pays everything") {
        const auto out = fixed_barrier_payout(phi, 0.0);
        for (int i = 0; i < 5; ++i) CHECK(out.v[i] == phi.v[0] + g.node(i));
    }
    SUBCASE("out-of-domain barrier rejected") {
        CHECK_THROWS_AS(fixed_barrier_payout(phi, -0.1), std::domain_error);
        CHECK_THROWS_AS(fixed_barrier_payout(phi, 2.5), std::domain_error);
    }
}

TEST_CASE("issuance envelope") {
    ModelParams p;
    p.lambda_f = 0.1;
    p.lambda_p = 0.2;

    SUBCASE("affine input prefers the smallest offset") {
        ReserveGrid g{1.0, 11};
        const auto env = issuance_envelope(ValueFn1D::identity(g), p);
        const double h = g.spacing();
        for (int i = 0; i < g.n_x; ++i)
            CHECK(env.v[i] ==
                  doctest::Approx(g.node(i) - 0.1 - 0.2 * h).epsilon(1e-12));
    }
    SUBCASE("worked example at zero") {
        ReserveGrid g{3.0, 4};
        ValueFn1D phi{g, {0.0, 2.0, 2.5, 2.6}};
        const auto env = issuance_envelope(phi, p);
        CHECK(env.v[0] == doctest::Approx(0.7).epsilon(1e-14));
        const auto target = issuance_target(phi, p, 0);
        REQUIRE(target.has_value());
        CHECK(*target == doctest::Approx(1.0));
    }
    SUBCASE("exhaustive equivalence, exact on dyadic data") {
        std::mt19937 rng(83);
        ModelParams pd;
        pd.lambda_f = std::ldexp(1.0, -4);
        pd.lambda_p = 0.25;
        for (int trial = 0; trial < 30; ++trial) {
            const int n = 3 + static_cast<int>(rng() % 62);
            ReserveGrid g = testutil::dyadic_grid(n, 2);
            ValueFn1D phi{g, testutil::dyadic_values(n, rng)};
            pd.zeta_max = (trial % 3 == 0) ? g.x_max / 2.0 : 0.0;
            const auto env = issuance_envelope(phi, pd);
            const auto slow = brute_issuance(phi, pd);
            for (int i = 0; i < n; ++i) CHECK(env.v[i] == slow[i]);
            // the fast sweep used inside the march agrees on exact data
            const ModelParams pr = resolve_zeta_max(pd, g);
            std::vector<double> fast(n), scratch(n);
            kernels::issuance_sweep(phi.v.data(), n, g.spacing(),
                                    kernels::issuance_k_cap(pr.zeta_max, g.spacing()),
                                    pr.lambda_f, pr.lambda_p, scratch.data(),
                                    fast.data());
            for (int i = 0; i < n; ++i) CHECK(fast[i] == slow[i]);
        }
    }
    SUBCASE("monotone in the argument") {
        std::mt19937 rng(19);
        ReserveGrid g{2.0, 33};
        for (int trial = 0; trial < 100; ++trial) {
            ValueFn1D lo{g, testutil::real_values(g.n_x, rng)};
            ValueFn1D hi = lo;
            std::uniform_real_distribution<double> u(0.0, 0.3);
            for (auto& x : hi.v) x += u(rng);
            const auto elo = issuance_envelope(lo, p);
            const auto ehi = issuance_envelope(hi, p);
            for (int i = 0; i < g.n_x; ++i) CHECK(elo.v[i] <= ehi.v[i]);
        }
    }
}

TEST_CASE("issuance target rules") {
    ModelParams p;
    p.lambda_f = 0.1;
    p.lambda_p = 0.2;
    ReserveGrid g{1.0, 11};

    SUBCASE("never profitable on the identity") {
        const auto phi = ValueFn1D::identity(g);
        for (int i = 0; i < g.n_x; ++i)
            CHECK_FALSE(issuance_target(phi, p, i).has_value());
    }
    SUBCASE("ties break to the smallest issuance") {
        ModelParams q;
        q.lambda_f = 0.1;
        q.lambda_p = 0.0;
        ReserveGrid gt{3.0, 4};
        ValueFn1D phi{gt, {0.0, 2.0, 3.0, 3.0}};  // gains tie at zeta = 1, 2
        const auto t = issuance_target(phi, q, 0);
        REQUIRE(t.has_value());
        CHECK(*t == doctest::Approx(1.0));
    }
}

TEST_CASE("barrier extraction") {
    SUBCASE("identity marks full liquidation") {
        ReserveGrid g{1.0, 11};
        const auto pol = extract_barriers(ValueFn1D::identity(g));
        CHECK(pol.dividend_barrier[0] == 0.0);
        CHECK(pol.fully_liquidating[0] == 1);
    }
    SUBCASE("hump and payout-to-zero region") {
        ReserveGrid g = testutil::dyadic_grid(11, 3);  // h = 1/8
        ValueFn1D phi{g, std::vector<double>(11)};
        // excess flat through node 2, then rising to a plateau from node 6 on
        const std::vector<double> excess{8, 8, 8, 10, 12, 13, 14, 14, 14, 14, 14};
        for (int i = 0; i < 11; ++i)
            phi.v[i] = g.node(i) + std::ldexp(excess[i], -4);
        const auto pol = extract_barriers(phi);
        CHECK(pol.dividend_barrier[0] == g.node(6));
        CHECK(pol.fully_liquidating[0] == 0);
        REQUIRE_FALSE(std::isnan(pol.liquidation_barrier[0]));
        CHECK(pol.liquidation_barrier[0] == g.node(2));
    }
    SUBCASE("slice-wise in two dimensions") {
        StateGrid2D g2{testutil::dyadic_grid(11, 3), -1.0, 1.0, 3};
        ValueFn2D phi = ValueFn2D::identity(g2);
        for (int i = 0; i < 11; ++i)
            phi.at(i, 2) = g2.reserve.node(i) + std::ldexp(std::min(i, 5), -3);
        const auto pol = extract_barriers(phi);
        CHECK(pol.n_slices() == 3);
        CHECK(pol.fully_liquidating[0] == 1);
        CHECK(pol.fully_liquidating[1] == 1);
        CHECK(pol.fully_liquidating[2] == 0);
        CHECK(pol.dividend_barrier[2] == g2.reserve.node(5));
        CHECK(pol.mu_nodes[2] == doctest::Approx(1.0));
    }
    SUBCASE("optimal barrier reproduces the envelope on unimodal excess") {
        std::mt19937 rng(5);
        ReserveGrid g = testutil::dyadic_grid(33);
        for (int trial = 0; trial < 20; ++trial) {
            // unimodal excess: increase then flat
            std::vector<double> e(g.n_x, 0.0);
            const int peak = 3 + static_cast<int>(rng() % 25);
            for (int i = 1; i < g.n_x; ++i) {
                const double step =
                    (i <= peak) ? std::ldexp(static_cast<double>(1 + rng() % 7), -8)
                                : 0.0;
                e[i] = e[i - 1] + step;
            }
            ValueFn1D phi{g, std::vector<double>(g.n_x)};
            for (int i = 0; i < g.n_x; ++i) phi.v[i] = g.node(i) + e[i];
            const auto pol = extract_barriers(phi);
            const auto via_rule =
                fixed_barrier_payout(phi, pol.dividend_barrier[0]);
            const auto via_env = payout_envelope(phi);
            for (int i = 0; i < g.n_x; ++i) CHECK(via_rule.v[i] == via_env.v[i]);
        }
    }
}
