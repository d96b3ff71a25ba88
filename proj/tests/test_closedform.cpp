#include "olg/closedform.hpp"

#include <doctest.h>

#include <cmath>

using namespace olg;
using doctest::Approx;

TEST_CASE("x-sequence families") {
    const auto f1 = fig1_spec<double>();
    CHECK(f1.rho() == Approx(4.0));
    CHECK(f1.x(0) == Approx(5.0));
    CHECK(f1.x(3) == Approx(5 * 1.331));
    CHECK(*f1.declared_growth() == Approx(1 / 1.1));

    const auto f2 = fig2_spec<double>();
    CHECK(f2.rho() == Approx(0.75));
    CHECK(f2.x(2) == Approx(1.81));
    CHECK(*f2.declared_growth() == Approx(0.9));

    const auto f3 = fig3_spec<double>();
    CHECK(f3.x(1) == Approx(0.75 + 0.75));
    CHECK_FALSE(f3.declared_growth().has_value());

    for (const auto& s : {f1, f2, f3}) {
        for (std::size_t t = 0; t < 30; ++t) {
            const double x = s.x(t), xn = s.x(t + 1), r = s.rho();
            CHECK(s.excess(t) == Approx(x - r).scale(1));
            CHECK(s.gap(t) == Approx(x + r / xn - 1 - r).scale(1));
        }
    }
}

TEST_CASE("geometric family closed form") {
    // k_1 = 4/5 and p_0 = 1/5 from x_0 = 5; d_1 = 0.8^(2/3) * 8/11
    const auto path = construct(fig1_spec<double>(), 1.0, 40);
    CHECK(path.k[1] == Approx(0.8).epsilon(1e-15));
    CHECK(path.p[0] == Approx(0.2).epsilon(1e-15));
    CHECK(path.d[0] == 0);
    CHECK(path.d[1] == Approx(std::pow(0.8, 2.0 / 3) * 8 / 11).epsilon(1e-14));
    CHECK(path.d[1] == Approx(0.626738).epsilon(1e-5));
    CHECK(path.checks.capital_closed_form < 1e-12);
    CHECK(path.checks.min_price > 0);
    CHECK(path.checks.min_dividend > 0);
}

TEST_CASE("constructed path satisfies its defining recursions") {
    auto s = fig2_spec<double>();
    const auto path = construct(s, 1.0, 60);
    for (std::size_t t = 0; t < 60; ++t) {
        const double next = s.A * s.alpha * std::pow(path.k[t], s.alpha) / (s.G * path.x[t]);
        CHECK(path.k[t + 1] == Approx(next).epsilon(1e-14));
        const double price = s.A * s.alpha / s.rho() * std::pow(path.k[t], s.alpha) - s.G * path.k[t + 1];
        CHECK(path.p[t] == Approx(price).epsilon(1e-10));
    }
}

TEST_CASE("multiprecision construction rounds to the same path") {
    const auto spec = fig2_spec<double>();
    const auto plain = construct(spec, 1.0, 100);
    const auto precise = construct_auto(spec, 1.0, 100);
    CHECK(precise.digits >= 32);
    for (std::size_t t = 0; t <= 100; t += 10) {
        CHECK(plain.k[t] == Approx(precise.k[t]).epsilon(1e-13));
        CHECK(plain.p[t] == Approx(precise.p[t]).epsilon(1e-8));
    }
}

TEST_CASE("invalid x-sequences are rejected") {
    auto s = fig1_spec<double>();
    s.C = 1;  // x_0 = 1 < rho = 4
    const auto v = check_x_sequence(s, 10);
    REQUIRE(v);
    CHECK(v->index == 0);
    CHECK(v->condition == "x_t > rho");
    CHECK_FALSE(family_condition(s).holds);
    try {
        construct(s, 1.0, 10);
        FAIL("construct accepted an invalid sequence");
    } catch (const ConstructionError& e) {
        CHECK(e.index() == 0);
    }

    auto t = fig2_spec<double>();
    t.sigma = 1.2;  // one_plus_geometric needs sigma < 1
    CHECK_FALSE(family_condition(t).holds);

    auto u = fig1_spec<double>();
    u.alpha = 1.5;
    CHECK_THROWS_AS(u.validate(), std::invalid_argument);
    CHECK(family_condition(fig1_spec<double>()).holds);
    CHECK(family_condition(fig2_spec<double>()).holds);
    CHECK(family_condition(fig3_spec<double>()).holds);
}

TEST_CASE("exponent identities") {
    const auto [mu1, nu1] = exponents(0.3, 1);
    CHECK(mu1 == Approx(0.7));
    CHECK(nu1 == Approx(0).scale(1));
    const auto [mu2, nu2] = exponents(2.0 / 3, 2);
    CHECK(mu2 == Approx(-1.0 / 9));
    CHECK(nu2 == Approx(1.0 / 3));
    // nu_t / t tends to (1 - 2 alpha) / (1 - alpha)
    const auto [mu, nu] = exponents(2.0 / 3, 4000);
    CHECK(nu / 4000 == Approx(-1.0).epsilon(1e-3));
    CHECK(mu == Approx(-1.0));
}

TEST_CASE("replay through the simulator") {
    const auto spec = fig2_spec<double>();
    const auto rep = oracle_replay(spec, 1.0, 100);
    CHECK(rep.status == SimStatus::completed);
    CHECK(rep.max_rel_k <= kReplayAcceptance);
    CHECK(rep.max_rel_p <= kReplayAcceptance);

    // the geometric family cannot be followed in double
    const auto path = construct_auto(fig1_spec<double>(), 1.0, 100);
    const auto plain = replay(economy_for(path), path.p[0], path.k, path.p, 100);
    CHECK(plain.status != SimStatus::completed);
}

TEST_CASE("precision search") {
    const auto found = choose_digits([](unsigned d) { return std::pair<std::size_t, bool>{d, d >= 200}; }, 32, 4096);
    CHECK(found.resolved);
    CHECK(found.digits == 256);
    CHECK(found.attempts.size() == 4);

    // the same failure period twice marks a model failure
    const auto stuck = choose_digits([](unsigned) { return std::pair<std::size_t, bool>{7, false}; }, 32, 4096);
    CHECK_FALSE(stuck.resolved);
    CHECK(stuck.attempts.size() == 2);
}

TEST_CASE("theta economy") {
    const auto spec = fig1_spec<double>();
    ScopedDigits guard(construction_digits(spec, 120));
    const auto base = construct(spec.cast<mp_real>(), mp_real(1), 120);
    const auto th = construct_theta(base);
    CHECK(to_double(th.theta) == 256);
    CHECK(to_double(th.R_star) < 1);
    CHECK(th.t0 == 1);
    for (std::size_t t = th.t0; t <= th.horizon; ++t) CHECK(th.d[t] > 0);
    // steady state solves the theta-economy fixed point
    const auto k = theta_steady_state(mp_real(6), mp_real(2) / 3, mp_real(1) / 2, mp_real(1), mp_real(256));
    CHECK(to_double(k) == Approx(to_double(th.k_star)).epsilon(1e-12));

    ThetaOptions fixed;
    fixed.theta = 1;
    // a fixed theta is taken as given and its rate reported
    CHECK(to_double(construct_theta(base, fixed).R_star) == Approx(3.3709520480529447).epsilon(1e-10));

    ThetaOptions strict;
    strict.target_rate = 1e-9;
    CHECK_THROWS_AS(construct_theta(base, strict), ThetaSearchError);

    const auto econ = shifted_economy(th);
    CHECK(econ.dividends.at(0) == 0);
    CHECK(to_double(shifted_price(th)) == Approx(to_double(th.p[th.t0])));
}
