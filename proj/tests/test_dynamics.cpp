#include "olg/dynamics.hpp"

#include <doctest.h>

#include <cmath>

using namespace olg;
using doctest::Approx;

namespace {

Economy<double> normalized(double alpha, double beta, DividendStream<double> d = DividendStream<double>::zero(),
                           double k0 = 1.0, double G = 1.0) {
    const double A = G / (beta * (1 - alpha));
    return Economy<double>(G, Technology<double>::cobb_douglas(A, alpha, 1.0), SavingsRule<double>::log_utility(beta),
                           std::move(d), k0);
}

}  // namespace

TEST_CASE("zero price follows the Diamond path") {
    const auto econ = normalized(1.0 / 3, 2.0 / 3, DividendStream<double>::zero(), 0.2);
    const auto traj = simulate(econ, 0.0, 200);
    REQUIRE(traj.completed());
    CHECK(traj.size() == 201);
    CHECK(traj.back().k == Approx(1.0).epsilon(1e-12));
    for (const auto& per : traj.periods) CHECK(per.p == 0);
    const auto ref = diamond_reference(econ, 200);
    CHECK(ref.monotone);
    CHECK(ref.k_limit == Approx(1.0).epsilon(1e-12));
    CHECK(ref.R_limit == Approx(0.75).epsilon(1e-12));
    CHECK(ref.summable);
    for (std::size_t t = 0; t <= 200; t += 20) CHECK(ref.k[t] == Approx(traj.periods[t].k).epsilon(1e-14));
}

TEST_CASE("price above the savings cap fails high") {
    const auto econ = normalized(1.0 / 3, 2.0 / 3);
    const double cap = savings_cap(econ, wage(econ.tech, 1.0));
    const auto at_cap = simulate(econ, cap, 50);
    CHECK(at_cap.status == SimStatus::fail_high);
    CHECK(at_cap.fail_t == 0);
    // just above the saddle: leaves the domain later
    const auto above = simulate(econ, 0.2501, 200);
    CHECK(above.status == SimStatus::fail_high);
    CHECK(above.fail_t > 0);
}

TEST_CASE("positive dividends with a zero price fail low") {
    const auto econ = normalized(1.0 / 3, 2.0 / 3, DividendStream<double>::geometric(0.05, 0.5));
    const auto traj = simulate(econ, 0.0, 50);
    CHECK(traj.status == SimStatus::fail_low);
    CHECK(traj.fail_t == 1);
}

TEST_CASE("price recursion and valuation identities") {
    const auto econ = normalized(1.0 / 3, 2.0 / 3, DividendStream<double>::geometric(0.01, 0.5));
    const auto traj = simulate(econ, 0.1, 60);
    REQUIRE(traj.completed());
    const auto& ps = traj.periods;
    for (std::size_t t = 1; t < ps.size(); ++t) {
        CHECK(ps[t].p == Approx(ps[t].R / econ.G * ps[t - 1].p - ps[t].d).scale(1));
        CHECK(ps[t].q == Approx(ps[t - 1].q / ps[t].R));
        CHECK(ps[t].b == Approx(ps[t].p - ps[t].v).scale(1));
    }
    CHECK(ps[0].q == 1);
    CHECK(ps.back().v == 0);
    const auto r = trajectory_residuals(econ, traj);
    CHECK(r.market_clearing < 1e-14);
    CHECK(r.price_recursion < 1e-12);
    CHECK(r.no_arbitrage < 1e-12);
    CHECK(r.max_capital_bound <= 0);
    CHECK(r.max_price_bound <= 0);
}

TEST_CASE("fundamental value of a constant dividend stream") {
    // hand-built record with R = 2 and d = 1
    Trajectory<double> traj;
    for (std::size_t t = 0; t <= 3; ++t) traj.periods.push_back(Period<double>{t, 1, 0, 2, 0, 1, 0, 0, 0});
    fill_valuation(traj, 1.0);
    CHECK(traj.periods[3].v == 0);
    CHECK(traj.periods[2].v == Approx(0.5));
    CHECK(traj.periods[1].v == Approx(0.75));
    CHECK(traj.periods[0].v == Approx(0.875));
    CHECK(traj.periods[3].q == Approx(0.125));
}

TEST_CASE("steady states of the normalized economies") {
    const auto over = normalized(1.0 / 3, 2.0 / 3);
    const auto ss = bubbleless_steady_states(over);
    REQUIRE(ss.bubbleless.size() == 1);
    CHECK(ss.bubbleless[0] == Approx(1.0).epsilon(1e-12));
    CHECK(ss.rho == Approx(0.75));
    REQUIRE(ss.bubbly);
    CHECK(ss.bubbly->k == Approx(0.649519052838329).epsilon(1e-12));
    CHECK(ss.bubbly->p == Approx(0.216506350946110).epsilon(1e-12));
    CHECK(ss.warnings.empty());

    const auto under = normalized(2.0 / 3, 0.5);
    const auto ss2 = bubbleless_steady_states(under);
    REQUIRE(ss2.bubbleless.size() == 1);
    CHECK(ss2.rho == Approx(4.0));
    CHECK_FALSE(ss2.bubbly);
    REQUIRE(ss2.golden);
    CHECK(ss2.golden->p < 0);
}

TEST_CASE("growth factor shifts the steady state") {
    const auto econ = normalized(0.3, 0.5, DividendStream<double>::zero(), 1.0, 1.2);
    const auto ss = bubbleless_steady_states(econ);
    REQUIRE(ss.bubbleless.size() == 1);
    CHECK(ss.bubbleless[0] == Approx(1.0).epsilon(1e-12));
    CHECK(ss.rho == Approx(0.3 / (0.5 * 0.7)).epsilon(1e-12));
}

TEST_CASE("dividend growth estimates") {
    const auto geo = DividendStream<double>::geometric(1.0, 0.9);
    const auto g = dividend_growth_estimate(geo, 1.1, 100);
    CHECK(g.exact);
    CHECK(g.value == Approx(0.99));

    std::vector<double> v(201);
    for (std::size_t t = 0; t < v.size(); ++t) v[t] = 2 * std::pow(0.8, static_cast<double>(t));
    const auto est = dividend_growth_estimate(DividendStream<double>::explicit_sequence(v), 1.0, 200);
    CHECK_FALSE(est.exact);
    CHECK(est.value == Approx(0.8).epsilon(1e-2));

    CHECK(dividend_growth_estimate(DividendStream<double>::zero(), 1.0, 10).value == 0);
    CHECK_THROWS_AS(dividend_growth_estimate(geo, 1.0, 1), std::invalid_argument);
}

TEST_CASE("multiprecision simulation follows the saddle path longer") {
    // the saddle price of the normalized economy is exactly 1/4
    const auto in_double = simulate(normalized(1.0 / 3, 2.0 / 3), 0.25, 400);
    REQUIRE(in_double.completed());
    CHECK(in_double.back().k == Approx(1.0).epsilon(1e-6));

    ScopedDigits guard(120);
    const mp_real alpha = mp_real(1) / 3, beta = mp_real(2) / 3;
    const Economy<mp_real> mp(mp_real(1), Technology<mp_real>::cobb_douglas(1 / (beta * (1 - alpha)), alpha, mp_real(1)),
                              SavingsRule<mp_real>::log_utility(beta), DividendStream<mp_real>::zero(), mp_real(1));
    const auto precise = simulate(mp, mp_real(1) / 4, 400);
    REQUIRE(precise.completed());
    CHECK(to_double(precise.back().k) == Approx(0.649519052838329).epsilon(1e-9));
    CHECK(to_double(precise.back().p) == Approx(0.216506350946110).epsilon(1e-9));
}
