#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "perdiv/model.hpp"
#include "test_util.hpp"

using namespace perdiv;

TEST_CASE("issuance cost function") {
    ModelParams p;
    p.lambda_f = 0.1;
    p.lambda_p = 0.2;
    const CostFn c = make_cost(p);

    CHECK(c(0.0) == 0.0);
    CHECK(c(1.0) == doctest::Approx(1.3).epsilon(1e-14));

    ModelParams q;
    q.lambda_f = 0.0025;
    q.lambda_p = 0.0;
    CHECK(make_cost(q)(0.01) == doctest::Approx(0.0125).epsilon(1e-14));

    CHECK_THROWS_AS(c(-0.5), std::domain_error);
}

TEST_CASE("cost superadditivity and domination") {
    ModelParams p;
    p.lambda_f = 0.03;
    p.lambda_p = 0.4;
    p.zeta_max = 2.0;
    const CostFn c = make_cost(p);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(1e-6, p.zeta_max);
    for (int k = 0; k < 500; ++k) {
        const double a = u(rng), b = u(rng);
        CHECK(c(a + b) <= c(a) + c(b) + 1e-15);
        CHECK(c(a) >= a);
    }
}

TEST_CASE("a_star values and fixed-point identity") {
    ModelParams p;  // defaults are the calibrated 1-D set
    p.mu = 0.01;
    p.rho = 0.04;
    p.period = 1.0;
    CHECK(a_star(p) == doctest::Approx(0.24503).epsilon(1e-4));

    p.mu = 0.0;
    CHECK(a_star(p) == 0.0);

    p.mu = 0.15;
    p.rho = 0.05;
    CHECK(a_star(p) == doctest::Approx(0.15 / std::expm1(0.05)).epsilon(1e-14));

    // e^{-rho T}(A* + mu T) = A* characterizes A* exactly
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.01, 2.0);
    for (int k = 0; k < 200; ++k) {
        ModelParams q;
        q.mu = u(rng);
        q.rho = u(rng);
        q.period = u(rng);
        const double A = a_star(q);
        const double lhs = std::exp(-q.rho * q.period) * (A + q.mu * q.period);
        CHECK(std::abs(lhs - A) <= 1e-12 * std::max(1.0, std::abs(A)));
    }
}

TEST_CASE("parameter validation") {
    ModelParams p;
    p.zeta_max = 1.0;
    CHECK_NOTHROW(p.validate());
    ModelParams bad = p;
    bad.sigma = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.lambda_f = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.period = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    OUParams ou;
    CHECK_NOTHROW(ou.validate());
    ou.corr = 1.5;
    CHECK_THROWS_AS(ou.validate(), std::invalid_argument);
}

TEST_CASE("grids") {
    ReserveGrid g{0.2, 2001};
    CHECK_NOTHROW(g.validate());
    CHECK(g.node(0) == 0.0);
    CHECK(g.node(2000) == 0.2);
    CHECK(g.spacing() == doctest::Approx(1e-4));

    ReserveGrid bad{1.0, 2};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    StateGrid2D g2{{3.0, 241}, -1.6, 1.3, 117};
    CHECK_NOTHROW(g2.validate());
    CHECK(g2.mu_node(0) == doctest::Approx(-1.6));
    CHECK(g2.mu_node(116) == doctest::Approx(1.3));
    g2.mu_min = 2.0;
    CHECK_THROWS_AS(g2.validate(), std::invalid_argument);
}

TEST_CASE("value function interpolation and identity") {
    ReserveGrid g{1.0, 11};
    auto f = ValueFn1D::identity(g);
    CHECK(f(0.37) == doctest::Approx(0.37).epsilon(1e-14));
    CHECK(f(-1.0) == 0.0);
    CHECK(f(2.0) == 1.0);  // clamped

    auto z = ValueFn2D::zeros(StateGrid2D{{1.0, 5}, -1.0, 1.0, 3});
    CHECK(z.v.size() == 15);
    z.at(2, 1) = 4.0;
    CHECK(z.v[1 * 5 + 2] == 4.0);
}

TEST_CASE("policy invariants") {
    Policy pol;
    pol.dividend_barrier = {0.5};
    pol.liquidation_barrier = {0.2};
    pol.fully_liquidating = {0};
    CHECK_NOTHROW(pol.validate());
    pol.liquidation_barrier = {0.7};
    CHECK_THROWS_AS(pol.validate(), std::invalid_argument);
}

TEST_CASE("domain default and zeta_max resolution") {
    ModelParams p;
    p.mu = 0.01;
    p.rho = 0.04;
    const double xm = default_x_max(p, 0.038);
    CHECK(xm == doctest::Approx(4.0 * (a_star(p) + 0.01)));

    ReserveGrid g{0.2, 101};
    ModelParams r = resolve_zeta_max(p, g);
    CHECK(r.zeta_max == 0.2);
    p.zeta_max = 0.05;
    r = resolve_zeta_max(p, g);
    CHECK(r.zeta_max == 0.05);
}
