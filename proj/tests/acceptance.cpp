// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "olg/closedform.hpp"
#include "olg/dynamics.hpp"
#include "olg/equilibria.hpp"
#include "olg/numeric.hpp"
#include "olg/primitives.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

using namespace olg;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Largest no-arbitrage residual over every completed trajectory seen.
struct NoArbitrageLog {
    double worst = 0;
    std::size_t count = 0;
    std::string worst_name;

    template <RealNumber Real>
    void add(const std::string& name, const Economy<Real>& econ, const Trajectory<Real>& traj) {
        if (!traj.completed()) return;
        const double r = trajectory_residuals(econ, traj).no_arbitrage;
        ++count;
        if (r >= worst) {
            worst = r;
            worst_name = name;
        }
    }
};

NoArbitrageLog no_arbitrage;

template <RealNumber Real>
Economy<Real> pure_bubble_fig2() {
    const auto s = fig2_spec<Real>();
    return Economy<Real>(s.G, Technology<Real>::cobb_douglas(s.A, s.alpha, Real(1)),
                         SavingsRule<Real>::log_utility(s.beta), DividendStream<Real>::zero(), Real(1));
}

// Replays a constructed path through the simulator at increasing precision,
// keeping the no-arbitrage residual of the accepted run.
ReplayReport replay_logged(const std::string& name, const XSequenceSpec<double>& spec, std::size_t T) {
    double na = 0;
    const auto rep = adaptive_replay(
        [&](unsigned digits) {
            ScopedDigits guard(digits);
            const auto path = construct(spec.cast<mp_real>(), mp_real(1), T);
            const auto econ = economy_for(path);
            const auto traj = simulate(econ, path.p[0], T);
            ReplayReport r;
            r.status = traj.status;
            r.fail_t = traj.fail_t;
            r.horizon = T;
            r.digits = digits;
            for (const auto& per : traj.periods) {
                r.max_rel_k = std::max(r.max_rel_k, rel_diff(per.k, path.k[per.t]));
                r.max_rel_p = std::max(r.max_rel_p, rel_diff(per.p, path.p[per.t]));
            }
            if (traj.completed()) na = trajectory_residuals(econ, traj).no_arbitrage;
            return r;
        },
        T, oracle_start_digits(spec, 1.0, T));
    if (rep.status == SimStatus::completed) {
        no_arbitrage.worst = std::max(no_arbitrage.worst, na);
        ++no_arbitrage.count;
        if (na == no_arbitrage.worst) no_arbitrage.worst_name = name + " replay";
    }
    return rep;
}

void oracle_equivalence() {
    constexpr std::size_t T = 200;
    bool ok = true;
    std::string detail;
    auto check = [&](const std::string& name, const std::function<ReplayReport()>& run) {
        const auto start = Clock::now();
        const auto rep = run();
        const double secs = seconds_since(start);
        const double rel = std::max(rep.max_rel_k, rep.max_rel_p);
        const bool pass = rep.status == SimStatus::completed && rel <= 1e-10 && secs < 1.0;
        ok = ok && pass;
        detail += fmt("%s %s rel=%.2e %.2fs (%u digits); ", name.c_str(), to_string(rep.status), rel, secs,
                      rep.digits);
    };
    check("geometric", [] { return replay_logged("geometric", fig1_spec<double>(), T); });
    check("one_plus", [] { return replay_logged("one_plus", fig2_spec<double>(), T); });
    check("rho_plus", [] { return replay_logged("rho_plus", fig3_spec<double>(), T); });
    check("theta", [] { return oracle_replay_theta(fig1_spec<double>(), 1.0, T + 1, {}, T); });
    report(1, "oracle equivalence", ok, detail);
}

void fig1() {
    const auto path = construct_auto(fig1_spec<double>(), 1.0, 400);
    const auto traj = to_trajectory(path);
    no_arbitrage.add("fig1 constructed", economy_for(path), traj);
    const double k1 = path.k[1], p0 = path.p[0], k200 = path.k[200], p200 = path.p[200];
    const double rate = std::pow(path.d[400], 1.0 / 400);
    const bool ok = std::abs(k1 - 0.8) <= 1e-12 && std::abs(p0 - 0.2) <= 1e-12 && k200 <= 1e-3 && p200 <= 1e-3 &&
                    std::abs(rate - 0.909091) <= 1e-2;
    report(2, "fig1 path", ok,
           fmt("k1=%.15g p0=%.15g k200=%.3e p200=%.3e d400^(1/400)=%.6f", k1, p0, k200, p200, rate));
}

void fig2() {
    const auto path = construct_auto(fig2_spec<double>(), 1.0, 200);
    no_arbitrage.add("fig2 constructed", economy_for(path), to_trajectory(path));
    const double k = path.k[200], p = path.p[200];
    const bool ok = std::abs(k - 0.649519) <= 1e-6 && std::abs(p - 0.216506) <= 1e-4;
    report(3, "fig2 path", ok, fmt("k200=%.9f p200=%.9f", k, p));
}

void fig3() {
    const auto path = construct_auto(fig3_spec<double>(), 1.0, 200);
    const auto traj = to_trajectory(path);
    no_arbitrage.add("fig3 constructed", economy_for(path), traj);
    double sum = 0;
    for (std::size_t t = 1; t <= 200; ++t) sum += path.d[t] / path.p[t];
    const auto bt = bubble_test(traj);
    const double k = path.k[200], p = path.p[200];
    const bool ok = std::abs(k - 1) <= 1e-6 && p <= 1e-5 && std::abs(sum - 4.0) <= 1e-6 &&
                    bt.verdict == BubbleVerdict::bubbly;
    report(4, "fig3 path", ok,
           fmt("k200=%.12f p200=%.3e sum d/p=%.15g bubble_test=%s", k, p, sum, to_string(bt.verdict)));
}

void monotonicity() {
    // Working precision well above double so that ties near the steady
    // state are not produced by rounding.
    ScopedDigits guard(60);
    const auto econ = pure_bubble_fig2<mp_real>();
    constexpr std::size_t T = 100;
    constexpr int n = 20;
    std::vector<Trajectory<mp_real>> paths;
    bool all_survive = true;
    for (int i = 1; i <= n; ++i) {
        const mp_real p0 = mp_real(1) / 4 * i / (n + 1);
        paths.push_back(simulate(econ, p0, T));
        all_survive = all_survive && paths.back().completed();
        no_arbitrage.add("monotonicity", econ, paths.back());
    }
    std::size_t violations = 0;
    if (all_survive) {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                for (std::size_t t = 1; t <= T; ++t) {
                    const auto& a = paths[i].periods[t];
                    const auto& b = paths[j].periods[t];
                    if (!(b.k < a.k) || !(b.p > a.p)) ++violations;
                }
            }
        }
    }
    report(5, "monotonicity in p0", all_survive && violations == 0,
           fmt("%d survivors of %d, %zu ordering violations over %d pairs", all_survive ? n : 0, n, violations,
               n * (n - 1) / 2));
}

// Largest grid point that survives T periods, refined by nesting a
// 10^4-point grid inside the last surviving cell.
double grid_oracle(const Economy<double>& econ, std::size_t T, double lo, double hi, int levels) {
    constexpr int n = 10000;
    for (int level = 0; level < levels; ++level) {
        const double h = (hi - lo) / (n - 1);
        int last = -1;
        for (int i = 0; i < n; ++i) {
            if (!simulate(econ, lo + h * i, T).completed()) break;
            last = i;
        }
        if (last < 0) return lo;
        if (last == n - 1) return hi;
        const double new_lo = lo + h * last;
        hi = lo + h * (last + 1);
        lo = new_lo;
    }
    return lo;
}

void equilibrium_set_check() {
    constexpr std::size_t T = 400;
    constexpr double tol = 1e-8;
    double p_lower = 0, p_upper = 0, kT = 0, pT = 0, secs = 0;
    bool completed = false;
    {
        ScopedDigits guard(80);
        const auto econ = pure_bubble_fig2<mp_real>();
        const auto start = Clock::now();
        const auto set = equilibrium_set(econ, T, tol);
        secs = seconds_since(start);
        p_lower = to_double(set.best_lower().value);
        p_upper = to_double(set.best_upper().value);
        completed = set.upper_path.completed() && set.upper_path.size() == T + 1;
        if (completed) {
            kT = to_double(set.upper_path.back().k);
            pT = to_double(set.upper_path.back().p);
        }
        no_arbitrage.add("eqset lower endpoint", econ, set.lower_path);
        no_arbitrage.add("eqset upper endpoint", econ, set.upper_path);
    }
    const auto econ_d = pure_bubble_fig2<double>();
    const double cap = savings_cap(econ_d, wage(econ_d.tech, econ_d.k0));
    const double oracle = grid_oracle(econ_d, T, 0.0, cap, 2);
    const bool ok = p_lower == 0 && completed && std::abs(kT - 0.649519) <= 1e-3 && std::abs(pT - 0.216506) <= 1e-3 &&
                    std::abs(p_upper - oracle) <= 2 * tol && secs < 10;
    report(6, "equilibrium set", ok,
           fmt("p_lower=%g p_upper=%.12f grid=%.12f path(400)=(%.6f, %.6f) %.2fs", p_lower, p_upper, oracle, kT, pT,
               secs));
}

void steady_states() {
    const auto e1 = economy_for(construct_auto(fig1_spec<double>(), 1.0, 50));
    const auto e2 = economy_for(construct_auto(fig2_spec<double>(), 1.0, 50));
    const auto s1 = bubbleless_steady_states(e1);
    const auto s2 = bubbleless_steady_states(e2);
    auto unit_set = [](const SteadyStateReport<double>& s) {
        return s.bubbleless.size() == 1 && std::abs(s.bubbleless[0] - 1) <= 1e-10;
    };
    const bool ok = unit_set(s1) && unit_set(s2) && std::abs(s1.rho - 4) <= 1e-10 && std::abs(s2.rho - 0.75) <= 1e-10 &&
                    !s1.bubbly && s2.bubbly.has_value();
    report(7, "steady states", ok,
           fmt("fig1 K={%.12f} rho=%.12g bubbly=%s; fig2 K={%.12f} rho=%.12g bubbly=%s",
               s1.bubbleless.empty() ? NAN : s1.bubbleless[0], s1.rho, s1.bubbly ? "present" : "absent",
               s2.bubbleless.empty() ? NAN : s2.bubbleless[0], s2.rho, s2.bubbly ? "present" : "absent"));
}

void transition_solver() {
    double worst = 0;
    std::size_t mismatched_domain = 0, points = 0;
    for (const auto& spec : {fig1_spec<double>(), fig2_spec<double>()}) {
        const Economy<double> econ(spec.G, Technology<double>::cobb_douglas(spec.A, spec.alpha, 1.0),
                                   SavingsRule<double>::log_utility(spec.beta), DividendStream<double>::zero(), 1.0);
        for (int i = 0; i < 100; ++i) {
            const double k = std::pow(10.0, -3 + 4.0 * i / 99);
            const double cap = spec.beta * (spec.A * (1 - spec.alpha) * std::pow(k, spec.alpha));
            for (int j = 0; j < 100; ++j) {
                const double p = cap * j / 100;
                const auto x = transition_bracketed(econ, k, p);
                ++points;
                if (!x) {
                    ++mismatched_domain;
                    continue;
                }
                const double closed = (cap - p) / spec.G;
                worst = std::max(worst, std::abs(*x - closed) / closed);
            }
            // Outside dom g, including the boundary itself.
            for (int j = 0; j < 100; ++j) {
                if (transition_bracketed(econ, k, cap * (1 + j / 100.0))) ++mismatched_domain;
            }
            if (!transition_bracketed(econ, k, std::nextafter(cap, 0.0))) ++mismatched_domain;
        }
    }
    report(8, "transition solver", worst <= 1e-12 && mismatched_domain == 0,
           fmt("%zu interior points, max rel diff %.2e, %zu domain mismatches", points, worst, mismatched_domain));
}

void exponent_identities() {
    double worst = 0;
    for (const double alpha : {0.2, 0.5, 2.0 / 3, 0.9}) {
        for (std::size_t t = 1; t <= 50; ++t) {
            double sum_mu = 0, sum_nu = 0;
            for (std::size_t s = 1; s <= t; ++s) {
                const double a = std::pow(alpha, static_cast<double>(s));
                sum_mu += a;
                sum_nu += a * static_cast<double>(t - s);
            }
            const double mu = 1 - sum_mu;
            const double nu = static_cast<double>(t - 1) - sum_nu;
            const auto [mu_c, nu_c] = exponents(alpha, t);
            worst = std::max({worst, std::abs(mu - mu_c), std::abs(nu - nu_c)});
        }
    }
    report(9, "exponent identities", worst <= 1e-12, fmt("max abs diff %.2e", worst));
}

void theta_economy() {
    constexpr std::size_t T = 400;
    const auto spec = fig1_spec<double>();
    ScopedDigits guard(construction_digits(spec, T + 1));
    const auto base = construct(spec.cast<mp_real>(), mp_real(1), T + 1);
    const auto th = construct_theta(base);
    const double R_star = to_double(th.R_star);
    bool positive = th.t0 <= T;
    for (std::size_t t = th.t0; t <= th.horizon && positive; ++t) positive = th.d[t] > 0;
    const double rate = std::pow(to_double(th.d[T]), 1.0 / T);
    const double target = std::pow(1.1, (1 - 2 * (2.0 / 3)) / (1 - 2.0 / 3));

    const auto econ = economy_cast<double>(shifted_economy(th));
    const auto ss = bubbleless_steady_states(econ);
    const auto regime = regime_report(econ, ss, th.horizon - th.t0);
    const auto& cond = regime.at("R_below_Gd_below_G");
    const bool ok = R_star < to_double(th.G) && positive && std::abs(rate - target) <= 1e-2 &&
                    cond.status == ConditionStatus::holds;
    report(10, "theta economy", ok,
           fmt("theta=%g R*=%.6f t0=%zu d>0=%s d400^(1/400)=%.6f target=%.6f R<Gd<G %s", to_double(th.theta), R_star,
               th.t0, positive ? "yes" : "no", rate, target, to_string(cond.status)));
}

}  // namespace

int main() {
    const auto start = Clock::now();
    oracle_equivalence();
    fig1();
    fig2();
    fig3();
    monotonicity();
    equilibrium_set_check();
    steady_states();
    transition_solver();
    exponent_identities();
    theta_economy();
    report(11, "no-arbitrage", no_arbitrage.count > 0 && no_arbitrage.worst <= 1e-10,
           fmt("%zu completed trajectories, worst %.2e (%s)", no_arbitrage.count, no_arbitrage.worst,
               no_arbitrage.worst_name.c_str()));
    std::printf("%d failed, %.2fs total\n", failures, seconds_since(start));
    return failures == 0 ? 0 : 1;
}
