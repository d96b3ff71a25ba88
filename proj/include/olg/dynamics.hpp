#pragma once

// Forward simulation of the detrended equilibrium system
//
//     k_{t+1} = g(k_t, p_t),   p_{t+1} = (R_{t+1} / G) p_t - d_{t+1},
//     R_t = f'(k_t),           w_t = f(k_t) - k_t f'(k_t),
//
// plus the no-asset (Diamond) reference path and steady-state enumeration.

#include "olg/numeric.hpp"
#include "olg/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace olg {

enum class SimStatus { completed, fail_low, fail_high };

inline const char* to_string(SimStatus s) {
    switch (s) {
        case SimStatus::completed: return "completed";
        case SimStatus::fail_low: return "fail_low";
        case SimStatus::fail_high: return "fail_high";
    }
    return "unknown";
}

template <RealNumber Real = double>
struct Period {
    std::size_t t = 0;
    Real k, p, R, w, d;
    Real q;  // date-0 discount factor, q_0 = 1, q_t = q_{t-1} / R_t
    Real v;  // detrended fundamental value (truncated at the horizon)
    Real b;  // detrended bubble, p - v
};

/// Bound on the part of v_T cut off by the horizon. Certified only when the
/// interest rates over the latter half of the path exceed max(G_d, G).
template <RealNumber Real = double>
struct FundamentalTail {
    bool certified = false;
    Real bound = 0;
    Real min_rate = 0;
};

template <RealNumber Real = double>
struct Trajectory {
    std::vector<Period<Real>> periods;
    std::size_t horizon = 0;
    SimStatus status = SimStatus::completed;
    std::size_t fail_t = 0;  // period at which the failure was detected
    FundamentalTail<Real> tail;

    bool completed() const { return status == SimStatus::completed; }
    const Period<Real>& back() const { return periods.back(); }
    std::size_t size() const { return periods.size(); }
};

/// Fills q, v and b in place from k, p, R, d. v_t sums the dividends recorded
/// on the trajectory (discounted back in detrended form) and drops the tail.
template <RealNumber Real>
void fill_valuation(Trajectory<Real>& traj, const Real& G) {
    auto& ps = traj.periods;
    if (ps.empty()) return;
    ps[0].q = 1;
    for (std::size_t t = 1; t < ps.size(); ++t) ps[t].q = ps[t - 1].q / ps[t].R;
    ps.back().v = 0;
    for (std::size_t t = ps.size() - 1; t-- > 0;) {
        ps[t].v = G / ps[t + 1].R * (ps[t + 1].v + ps[t + 1].d);
    }
    for (auto& period : ps) period.b = period.p - period.v;
}

struct GrowthEstimate {
    double value = 0;
    bool exact = false;
};

/// Long-run growth rate G_d = limsup D_t^{1/t} of undetrended dividends.
/// Returns the declared rate when one is known; otherwise the maximum of
/// (d_t G^t)^{1/t} over t in [T/2, T] as a finite-horizon proxy.
template <RealNumber Real>
GrowthEstimate dividend_growth_estimate(const DividendStream<Real>& stream, const Real& G, std::size_t T) {
    if (T < 2) throw std::invalid_argument("dividend_growth_estimate: horizon must be at least 2");
    if (auto declared = stream.declared_growth(G)) return {to_double(*declared), true};
    if (stream.zero_through(T)) return {0.0, true};
    using std::log;
    double best = 0;
    for (std::size_t t = std::max<std::size_t>(1, T / 2); t <= T; ++t) {
        const Real d = stream.at(t);
        if (!(d > 0)) continue;
        // (d_t G^t)^{1/t} = G exp(log(d_t) / t)
        const double est = to_double(G) * std::exp(to_double(Real(log(d))) / static_cast<double>(t));
        best = std::max(best, est);
    }
    return {best, false};
}

inline constexpr double kFailLowTolerance = 1e-12;

/// Iterates the equilibrium system from (k0, p0) for T periods. Stops with
/// fail_high when (k_t, p_t) leaves dom g and with fail_low when the price
/// recursion is forced negative beyond rounding.
template <RealNumber Real>
Trajectory<Real> simulate(const Economy<Real>& econ, const Real& p0, std::size_t T) {
    if (T < 1) throw std::invalid_argument("simulate: horizon must be at least 1");
    if (!(p0 >= 0)) throw std::invalid_argument("simulate: initial price must be nonnegative");

    Trajectory<Real> traj;
    traj.horizon = T;
    traj.periods.reserve(T + 1);

    auto pt = econ.tech.eval(econ.k0);
    Period<Real> cur;
    cur.t = 0;
    cur.k = econ.k0;
    cur.p = p0;
    cur.R = pt.fprime;
    cur.w = pt.wage;
    cur.d = econ.dividends.at(0);
    traj.periods.push_back(cur);

    for (std::size_t t = 0; t < T; ++t) {
        const auto next_k = transition_from_wage(econ, cur.w, cur.p);
        if (!next_k) {
            traj.status = SimStatus::fail_high;
            traj.fail_t = t;
            break;
        }
        pt = econ.tech.eval(*next_k);
        const Real d = econ.dividends.at(t + 1);
        const Real carried = pt.fprime / econ.G * cur.p;
        Real p = carried - d;
        if (p < 0) {
            // Dividends exceed the carried price by more than rounding.
            if (p < -Real(kFailLowTolerance) * std::max(carried, d)) {
                traj.status = SimStatus::fail_low;
                traj.fail_t = t + 1;
                break;
            }
            p = 0;
        }
        Period<Real> nxt;
        nxt.t = t + 1;
        nxt.k = *next_k;
        nxt.p = p;
        nxt.R = pt.fprime;
        nxt.w = pt.wage;
        nxt.d = d;
        traj.periods.push_back(nxt);
        cur = nxt;
    }

    fill_valuation(traj, econ.G);

    // Tail of the fundamental value beyond the last recorded period.
    const std::size_t last = traj.periods.size() - 1;
    if (last >= 2 && !econ.dividends.zero_through(last + 1)) {
        Real min_rate = traj.periods[last].R;
        for (std::size_t t = last / 2 + 1; t <= last; ++t) min_rate = std::min(min_rate, traj.periods[t].R);
        traj.tail.min_rate = min_rate;
        const auto gd = dividend_growth_estimate(econ.dividends, econ.G, std::max<std::size_t>(2, last));
        const Real ceiling = std::max(Real(gd.value), econ.G);
        if (min_rate > ceiling) {
            // Sum future dividends discounted at the smallest recent rate.
            const Real ratio = econ.G / min_rate;
            Real factor = 1, sum = 0;
            for (std::size_t s = 1; s <= 10 * (last + 1); ++s) {
                factor *= ratio;
                const Real term = econ.dividends.at(last + s) * factor;
                sum += term;
                if (term <= sum * epsilon<Real>() && s > 8) break;
            }
            // Geometric remainder at rate max(G_d, G) / min_rate.
            const Real r = ceiling / min_rate;
            sum += econ.dividends.at(last) * factor * r / (1 - r);
            traj.tail.certified = true;
            traj.tail.bound = sum;
        }
    } else {
        traj.tail.certified = true;
        traj.tail.min_rate = traj.periods[last].R;
    }
    return traj;
}

/// Largest residuals of the defining identities along a trajectory.
struct TrajectoryResiduals {
    double market_clearing = 0;  // |G k_{t+1} + p_t - s(w_t, R_{t+1})| / scale
    double price_recursion = 0;  // |p_t - (R_t/G) p_{t-1} + d_t| / scale
    double no_arbitrage = 0;     // |q_t p_t G^t - q_{t+1}(p_{t+1} + d_{t+1}) G^{t+1}| / scale
    double min_bubble = 0;       // min_t b_t
    double max_capital_bound = 0;  // max_t (k_{t+1} - f(k_t)/G) / scale, <= 0 expected
    double max_price_bound = 0;    // max_t (p_t - f(k_t)) / scale, <= 0 expected
};

template <RealNumber Real>
TrajectoryResiduals trajectory_residuals(const Economy<Real>& econ, const Trajectory<Real>& traj) {
    using std::abs;
    using std::pow;
    TrajectoryResiduals r;
    const auto& ps = traj.periods;
    double min_b = ps.empty() ? 0.0 : to_double(ps[0].b);
    for (std::size_t t = 0; t < ps.size(); ++t) {
        min_b = std::min(min_b, to_double(ps[t].b));
        const Real fk = econ.tech.f(ps[t].k);
        r.max_price_bound = std::max(r.max_price_bound, to_double(Real((ps[t].p - fk) / fk)));
        if (t + 1 >= ps.size()) continue;
        const auto& a = ps[t];
        const auto& n = ps[t + 1];
        const Real s = savings(econ.savings, a.w, n.R);
        const Real lhs = econ.G * n.k + a.p;
        const Real mc_scale = std::max({Real(1), Real(econ.G * n.k), s});
        r.market_clearing = std::max(r.market_clearing, to_double(Real(abs(lhs - s) / mc_scale)));

        const Real carried = n.R / econ.G * a.p;
        const Real pr_scale = std::max({carried, n.d, n.p, Real(std::numeric_limits<double>::min())});
        r.price_recursion = std::max(r.price_recursion, to_double(Real(abs(n.p - carried + n.d) / pr_scale)));

        // q_t p_t G^t vs q_{t+1} (p_{t+1} + d_{t+1}) G^{t+1}, divided by G^t.
        const Real left = a.q * a.p;
        const Real right = n.q * (n.p + n.d) * econ.G;
        const Real na_scale = std::max(abs(left), abs(right));
        if (na_scale > 0) r.no_arbitrage = std::max(r.no_arbitrage, to_double(Real(abs(left - right) / na_scale)));

        r.max_capital_bound = std::max(r.max_capital_bound, to_double(Real((n.k - fk / econ.G) / (fk / econ.G))));
    }
    r.min_bubble = min_b;
    return r;
}

// ---------------------------------------------------------------------------
// Steady states

template <RealNumber Real = double>
struct BubblySteadyState {
    Real k;  // f'(k_b) = G
    Real p;  // p(k_b)
};

template <RealNumber Real = double>
struct SteadyStateReport {
    std::vector<Real> bubbleless;  // sorted roots of k = g(k, 0)
    Real R = 0;                    // max over roots of f'(k)
    Real rho = 0;                  // R / G
    std::optional<BubblySteadyState<Real>> bubbly;  // present only when p_b > 0
    std::optional<BubblySteadyState<Real>> golden;  // (k_b, p(k_b)) whenever f'(k_b) = G is solvable
    Real k_max = 0;
    std::size_t grid_n = 0;
    std::vector<std::string> warnings;
};

/// Upper bound on any fixed point of g(., 0): every such k satisfies
/// G k < f(k), and f(k) - G k is eventually negative.
template <RealNumber Real>
Real default_k_max(const Economy<Real>& econ) {
    Real x = std::max(Real(1), econ.k0);
    while (econ.tech.f(x) > econ.G * x) x *= 2;
    return std::max(x, econ.k0) * 2;
}

inline constexpr std::size_t kSteadyStateGrid = 512;

template <RealNumber Real>
SteadyStateReport<Real> bubbleless_steady_states(const Economy<Real>& econ, std::optional<Real> k_max = std::nullopt,
                                                 std::size_t grid_n = kSteadyStateGrid) {
    using std::abs;
    using std::exp;
    using std::log;
    if (grid_n < 2) throw std::invalid_argument("bubbleless_steady_states: grid needs at least two points");
    SteadyStateReport<Real> rep;
    rep.k_max = k_max ? *k_max : default_k_max(econ);
    rep.grid_n = grid_n;

    auto gap = [&](const Real& k) { return *transition(econ, k, Real(0)) - k; };
    const Real lo = rep.k_max * Real(1e-8);
    const Real log_lo = log(lo), log_hi = log(rep.k_max);
    std::vector<Real> grid(grid_n);
    for (std::size_t i = 0; i < grid_n; ++i) {
        grid[i] = exp(log_lo + (log_hi - log_lo) * Real(i) / Real(grid_n - 1));
    }
    grid.back() = rep.k_max;

    std::vector<std::size_t> root_cells;
    Real prev = gap(grid[0]);
    if (prev == 0) {
        rep.bubbleless.push_back(grid[0]);
        root_cells.push_back(0);
    }
    for (std::size_t i = 1; i < grid_n; ++i) {
        const Real cur = gap(grid[i]);
        if (cur == 0) {
            rep.bubbleless.push_back(grid[i]);
            root_cells.push_back(i);
        } else if ((prev > 0 && cur < 0) || (prev < 0 && cur > 0)) {
            const auto b = bisect_sign_change(gap, grid[i - 1], grid[i], /*positive_side_high=*/cur > 0);
            rep.bubbleless.push_back(abs(gap(b.lo)) <= abs(gap(b.hi)) ? b.lo : b.hi);
            root_cells.push_back(i);
        }
        prev = cur;
    }
    for (std::size_t j = 1; j < root_cells.size(); ++j) {
        if (root_cells[j] - root_cells[j - 1] <= 1) {
            rep.warnings.push_back("steady states in adjacent grid cells; roots may not be isolated at this resolution");
        }
    }

    if (!rep.bubbleless.empty()) {
        rep.R = econ.tech.fprime(rep.bubbleless.front());
        for (const auto& k : rep.bubbleless) rep.R = std::max(rep.R, econ.tech.fprime(k));
        rep.rho = rep.R / econ.G;
    } else {
        rep.warnings.push_back("no bubbleless steady state found on the scan grid");
    }

    if (econ.G > econ.tech.fprime_at_infinity() && econ.G < econ.tech.fprime_near_zero()) {
        const Real kb = invert_marginal_product(econ.tech, econ.G);
        const Real pb = p_of_k(econ, kb);
        rep.golden = BubblySteadyState<Real>{kb, pb};
        if (pb > 0) rep.bubbly = rep.golden;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Diamond reference path

template <RealNumber Real = double>
struct DiamondReference {
    std::vector<Real> k;   // k*_0 .. k*_T
    std::vector<Real> R;   // R*_0 .. R*_T
    Real k_limit = 0;      // k*_T as the estimate of lim k*_t
    Real R_limit = 0;      // f'(k_limit)
    std::vector<Real> partial_sums;  // S_t = sum_{s<=t} D_s / (R*_1 ... R*_s), t = 0..T (S_0 = 0)
    bool monotone = true;
    bool summable = false;           // zero dividends, or G_d < R* established
    std::optional<Real> tail_bound;  // geometric bound on sum_{t>T} when summable
};

template <RealNumber Real>
DiamondReference<Real> diamond_reference(const Economy<Real>& econ, std::size_t T) {
    if (T < 1) throw std::invalid_argument("diamond_reference: horizon must be at least 1");
    DiamondReference<Real> ref;
    ref.k.reserve(T + 1);
    ref.R.reserve(T + 1);
    ref.partial_sums.reserve(T + 1);
    auto pt = econ.tech.eval(econ.k0);
    ref.k.push_back(econ.k0);
    ref.R.push_back(pt.fprime);
    ref.partial_sums.push_back(0);
    Real discount = 1;  // G^t / (R*_1 ... R*_t)
    int direction = 0;
    for (std::size_t t = 1; t <= T; ++t) {
        const Real next = *transition_from_wage(econ, pt.wage, Real(0));
        pt = econ.tech.eval(next);
        const int dir = next > ref.k.back() ? 1 : (next < ref.k.back() ? -1 : 0);
        if (dir != 0) {
            if (direction != 0 && dir != direction) ref.monotone = false;
            direction = dir;
        }
        ref.k.push_back(next);
        ref.R.push_back(pt.fprime);
        discount *= econ.G / pt.fprime;
        ref.partial_sums.push_back(ref.partial_sums.back() + econ.dividends.at(t) * discount);
    }
    ref.k_limit = ref.k.back();
    ref.R_limit = ref.R.back();

    if (econ.dividends.zero_through(10 * T)) {
        ref.summable = true;
        ref.tail_bound = Real(0);
    } else if (auto gd = econ.dividends.declared_growth(econ.G); gd && *gd < ref.R_limit) {
        ref.summable = true;
        // Last term continued at ratio G_d / R*.
        const Real r = *gd / ref.R_limit;
        const Real last = econ.dividends.at(T) * discount;
        ref.tail_bound = last * r / (1 - r);
    }
    return ref;
}

}  // namespace olg
