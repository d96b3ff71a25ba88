#pragma once

// Equilibrium set by forward shooting, long-run classification, the
// summability test for bubbles, and the regime conditions that predict
// which kind of equilibrium an economy admits.

#include "olg/dynamics.hpp"
#include "olg/numeric.hpp"
#include "olg/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace olg {

// ---------------------------------------------------------------------------
// Equilibrium set

struct EqSetOptions {
    /// Keep halving past `tol` until the bracket stops shrinking at the
    /// working precision. Needed when the endpoint path must track a saddle.
    bool refine = true;
    /// Repeat both searches at horizon 2T and report the shift.
    bool sensitivity = true;
};

template <RealNumber Real = double>
struct EndpointSearch {
    Real value = 0;  // estimate (surviving side of the bracket)
    Real width = 0;  // final bracket width
    int iterations = 0;
};

template <RealNumber Real = double>
struct EquilibriumSet {
    std::size_t T = 0;
    Real p_cap = 0;  // prices at or above this leave dom g at t = 0
    EndpointSearch<Real> lower;
    EndpointSearch<Real> upper;
    bool pure_bubble = false;
    bool survivor_found = false;
    std::optional<EndpointSearch<Real>> lower_2T;
    std::optional<EndpointSearch<Real>> upper_2T;
    Trajectory<Real> lower_path;  // simulated over T from the best lower estimate
    Trajectory<Real> upper_path;  // simulated over T from the best upper estimate
    std::vector<std::pair<double, SimStatus>> finest_probes;  // last probes of both searches
    std::size_t probes = 0;

    const EndpointSearch<Real>& best_lower() const { return lower_2T ? *lower_2T : lower; }
    const EndpointSearch<Real>& best_upper() const { return upper_2T ? *upper_2T : upper; }
};

namespace detail {

inline int refine_iterations(unsigned digits) {
    // Enough halvings to reach the unit roundoff from an O(1) bracket.
    return static_cast<int>(std::ceil(digits * 3.33)) + 64;
}

/// Bisection on a monotone three-way outcome. `moves_lo(status)` decides
/// which side of the boundary a probe lies on.
template <RealNumber Real, class MovesLo>
EndpointSearch<Real> bisect_boundary(const Economy<Real>& econ, std::size_t T, Real lo, Real hi, double tol,
                                     bool refine, bool keep_lo, MovesLo&& moves_lo, std::size_t& probes,
                                     std::vector<std::pair<double, SimStatus>>& trace) {
    const int max_iter = refine ? detail::refine_iterations(working_digits<Real>()) : kMaxBisection;
    EndpointSearch<Real> out;
    std::vector<std::pair<double, SimStatus>> recent;
    for (; out.iterations < max_iter; ++out.iterations) {
        if (!refine && hi - lo <= Real(tol)) break;
        const Real mid = lo + (hi - lo) / 2;
        if (!(mid > lo && mid < hi)) break;
        const auto traj = simulate(econ, mid, T);
        ++probes;
        recent.emplace_back(to_double(mid), traj.status);
        if (recent.size() > 8) recent.erase(recent.begin());
        if (moves_lo(traj.status)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    trace.insert(trace.end(), recent.begin(), recent.end());
    out.value = keep_lo ? lo : hi;
    out.width = hi - lo;
    return out;
}

template <RealNumber Real>
void search_endpoints(const Economy<Real>& econ, std::size_t T, double tol, bool refine, bool pure_bubble,
                      const Real& p_cap, EndpointSearch<Real>& lower, EndpointSearch<Real>& upper,
                      std::size_t& probes, std::vector<std::pair<double, SimStatus>>& trace) {
    // Largest price that does not fail high.
    upper = bisect_boundary(
        econ, T, Real(0), p_cap, tol, refine, /*keep_lo=*/true,
        [](SimStatus s) { return s != SimStatus::fail_high; }, probes, trace);

    if (pure_bubble) {
        lower = EndpointSearch<Real>{Real(0), Real(0), 0};
        return;
    }
    const auto at_zero = simulate(econ, Real(0), T);
    ++probes;
    if (at_zero.status != SimStatus::fail_low) {
        lower = EndpointSearch<Real>{Real(0), Real(0), 0};
        return;
    }
    // Smallest price that does not fail low.
    lower = bisect_boundary(
        econ, T, Real(0), p_cap, tol, refine, /*keep_lo=*/false,
        [](SimStatus s) { return s == SimStatus::fail_low; }, probes, trace);
}

}  // namespace detail

/// Brackets the set of initial prices whose paths survive T periods.
/// Surviving prices form an interval; its lower end separates fail_low from
/// survival and its upper end separates survival from fail_high.
///
/// When no probe survives (the interval has collapsed below the resolution
/// of Real) both searches still converge on the same boundary and the
/// result is returned with survivor_found = false.
template <RealNumber Real>
EquilibriumSet<Real> equilibrium_set(const Economy<Real>& econ, std::size_t T, double tol,
                                     const EqSetOptions& opt = {}) {
    if (T < 1) throw std::invalid_argument("equilibrium_set: horizon must be at least 1");
    if (!(tol > 0)) throw std::invalid_argument("equilibrium_set: tol must be positive");

    EquilibriumSet<Real> out;
    out.T = T;
    out.p_cap = savings_cap(econ, wage(econ.tech, econ.k0));
    out.pure_bubble = econ.dividends.zero_through(2 * T + 1);

    const auto at_cap = simulate(econ, out.p_cap, T);
    ++out.probes;
    if (at_cap.status != SimStatus::fail_high) {
        throw std::runtime_error("equilibrium_set: price cap does not fail high; savings cap is inconsistent");
    }
    const auto at_zero = simulate(econ, Real(0), T);
    ++out.probes;
    if (at_zero.status == SimStatus::fail_high) {
        throw std::runtime_error("equilibrium_set: zero price fails high; the economy has no feasible path");
    }

    detail::search_endpoints(econ, T, tol, opt.refine, out.pure_bubble, out.p_cap, out.lower, out.upper,
                             out.probes, out.finest_probes);
    if (opt.sensitivity) {
        EndpointSearch<Real> lo2, up2;
        std::vector<std::pair<double, SimStatus>> discard;
        detail::search_endpoints(econ, 2 * T, tol, opt.refine, out.pure_bubble, out.p_cap, lo2, up2, out.probes,
                                 discard);
        out.lower_2T = lo2;
        out.upper_2T = up2;
    }

    out.lower_path = simulate(econ, out.best_lower().value, T);
    out.upper_path = simulate(econ, out.best_upper().value, T);
    out.survivor_found = out.lower_path.completed() || out.upper_path.completed();
    return out;
}

// ---------------------------------------------------------------------------
// Classification

enum class LongRun { bubbleless_k_to_zero, asymptotically_bubbleless, asymptotically_bubbly, inconclusive };

inline const char* to_string(LongRun l) {
    switch (l) {
        case LongRun::bubbleless_k_to_zero: return "bubbleless_k_to_zero";
        case LongRun::asymptotically_bubbleless: return "asymptotically_bubbleless";
        case LongRun::asymptotically_bubbly: return "asymptotically_bubbly";
        case LongRun::inconclusive: return "inconclusive";
    }
    return "unknown";
}

struct ClassifyOptions {
    std::optional<double> tol;        // default 1e-4 max(1, G)
    double k_floor = 1e-6;
    std::optional<double> R_ceiling;  // default 10 G
};

struct LimitTarget {
    std::string name;  // "bubbly_steady_state" or "bubbleless_steady_state"
    double k = 0;
    double p = 0;
    double distance = 0;  // max(|k_T - k|, |p_T - p|)
};

struct Classification {
    LongRun label = LongRun::inconclusive;
    double k_T = 0, p_T = 0, R_T = 0;
    std::optional<double> montrucchio_sum;  // sum_{t=1}^T d_t / p_t, absent if some p_t = 0
    std::optional<LimitTarget> target;
    double tol = 0, k_floor = 0, R_ceiling = 0;
};

/// Finite-horizon reading of the terminal state against the three limit
/// classes. Any label is provisional: the classes are defined by limits.
template <RealNumber Real>
Classification classify(const Trajectory<Real>& traj, const SteadyStateReport<Real>& ss, const Economy<Real>& econ,
                        const ClassifyOptions& opt = {}) {
    if (!traj.completed()) throw std::invalid_argument("classify: trajectory did not complete its horizon");
    const double G = to_double(econ.G);
    Classification c;
    c.tol = opt.tol.value_or(1e-4 * std::max(1.0, G));
    c.k_floor = opt.k_floor;
    c.R_ceiling = opt.R_ceiling.value_or(10 * G);

    const auto& last = traj.back();
    c.k_T = to_double(last.k);
    c.p_T = to_double(last.p);
    c.R_T = to_double(last.R);

    double sum = 0;
    bool positive = true;
    for (std::size_t t = 1; t < traj.size(); ++t) {
        const auto& per = traj.periods[t];
        if (!(per.p > 0)) {
            positive = false;
            break;
        }
        sum += to_double(Real(per.d / per.p));
    }
    if (positive) c.montrucchio_sum = sum;

    if (c.k_T <= c.k_floor && c.R_T >= c.R_ceiling) {
        c.label = LongRun::bubbleless_k_to_zero;
        c.target = LimitTarget{"capital_to_zero", 0.0, 0.0, std::max(c.k_T, std::abs(c.p_T))};
        return c;
    }
    if (ss.bubbly) {
        const double kb = to_double(ss.bubbly->k), pb = to_double(ss.bubbly->p);
        if (std::abs(c.R_T - G) <= c.tol && std::abs(c.k_T - kb) <= c.tol && c.p_T >= pb / 2) {
            c.label = LongRun::asymptotically_bubbly;
            c.target = LimitTarget{"bubbly_steady_state", kb, pb, std::max(std::abs(c.k_T - kb), std::abs(c.p_T - pb))};
            return c;
        }
    }
    if (c.p_T <= c.tol) {
        std::optional<LimitTarget> best;
        for (const auto& k : ss.bubbleless) {
            const double kd = to_double(k);
            const double dist = std::abs(c.k_T - kd);
            if (dist <= c.tol * std::max(1.0, kd) && (!best || dist < best->distance)) {
                best = LimitTarget{"bubbleless_steady_state", kd, 0.0, std::max(dist, c.p_T)};
            }
        }
        if (best) {
            c.label = LongRun::asymptotically_bubbleless;
            c.target = best;
            return c;
        }
    }
    c.label = LongRun::inconclusive;
    return c;
}

// ---------------------------------------------------------------------------
// Summability test

enum class BubbleVerdict { bubbly, bubbleless, inconclusive };

inline const char* to_string(BubbleVerdict v) {
    switch (v) {
        case BubbleVerdict::bubbly: return "bubbly";
        case BubbleVerdict::bubbleless: return "bubbleless";
        case BubbleVerdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

struct BubbleTestOptions {
    double max_ratio = 1 - 1e-3;  // increments must shrink at least this fast
    double floor = 1e-2;          // increments bounded below by this mean divergence
};

struct BubbleTest {
    BubbleVerdict verdict = BubbleVerdict::inconclusive;
    std::vector<double> partial_sums;  // S_0 = 0, S_t = sum_{s<=t} d_s / p_s
    std::optional<double> tail_bound;  // geometric bound on the remainder when bubbly
    double ratio = 0;                  // largest consecutive increment ratio over the last half
    double min_increment = 0;          // smallest increment over the last half
    std::string reason;
};

/// With positive prices an asset is bubbly exactly when sum d_t / p_t
/// converges. The verdict uses the last half of the horizon only.
template <RealNumber Real>
BubbleTest bubble_test(const Trajectory<Real>& traj, const BubbleTestOptions& opt = {}) {
    BubbleTest out;
    const std::size_t T = traj.size() == 0 ? 0 : traj.size() - 1;
    out.partial_sums.assign(1, 0.0);
    if (T < 2) {
        out.reason = "horizon too short";
        return out;
    }
    std::vector<double> inc(T + 1, 0.0);
    for (std::size_t t = 1; t <= T; ++t) {
        const auto& per = traj.periods[t];
        if (!(per.p > 0)) {
            // With p_t = 0 the price, and so the bubble, stays at zero.
            out.verdict = BubbleVerdict::bubbleless;
            out.reason = "price reaches zero at t = " + std::to_string(t);
            return out;
        }
        inc[t] = to_double(Real(per.d / per.p));
        out.partial_sums.push_back(out.partial_sums.back() + inc[t]);
    }

    const std::size_t half = T / 2 + 1;
    bool all_zero = true;
    for (std::size_t t = 1; t <= T; ++t) all_zero = all_zero && inc[t] == 0;
    if (all_zero) {
        out.verdict = BubbleVerdict::bubbly;
        out.tail_bound = 0.0;
        out.reason = "no dividends over the horizon";
        return out;
    }

    out.min_increment = inc[half];
    double ratio = 0;
    bool ratio_defined = true;
    for (std::size_t t = half; t <= T; ++t) {
        out.min_increment = std::min(out.min_increment, inc[t]);
        if (t > half) {
            if (inc[t - 1] > 0) {
                ratio = std::max(ratio, inc[t] / inc[t - 1]);
            } else if (inc[t] > 0) {
                ratio_defined = false;
            }
        }
    }
    out.ratio = ratio;
    if (ratio_defined && ratio < opt.max_ratio) {
        out.verdict = BubbleVerdict::bubbly;
        out.tail_bound = inc[T] * ratio / (1 - ratio);
        out.reason = "increments decay geometrically";
        return out;
    }
    if (out.min_increment >= opt.floor) {
        out.verdict = BubbleVerdict::bubbleless;
        out.reason = "increments bounded below; partial sums diverge";
        return out;
    }
    out.reason = "tail neither geometric nor bounded below";
    return out;
}

// ---------------------------------------------------------------------------
// Regime conditions

enum class ConditionStatus { holds, fails, inconclusive };

inline const char* to_string(ConditionStatus s) {
    switch (s) {
        case ConditionStatus::holds: return "holds";
        case ConditionStatus::fails: return "fails";
        case ConditionStatus::inconclusive: return "inconclusive";
    }
    return "unknown";
}

struct Condition {
    std::string name;
    ConditionStatus status = ConditionStatus::inconclusive;
    std::vector<std::pair<std::string, double>> values;
    std::string note;
};

struct RegimeReport {
    std::size_t T = 0;
    std::vector<Condition> conditions;

    const Condition& at(const std::string& name) const {
        for (const auto& c : conditions) {
            if (c.name == name) return c;
        }
        throw std::out_of_range("regime_report: no condition " + name);
    }
};

/// Relative margin inside which estimated (not exact) comparisons are
/// reported as inconclusive.
inline constexpr double kEstimateMargin = 1e-3;
inline constexpr double kExactMargin = 1e-9;

namespace detail {

inline ConditionStatus compare_less(double a, double b, double margin) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    if (a < b - margin * scale) return ConditionStatus::holds;
    if (a > b + margin * scale) return ConditionStatus::fails;
    return ConditionStatus::inconclusive;
}

inline ConditionStatus both(ConditionStatus x, ConditionStatus y) {
    if (x == ConditionStatus::fails || y == ConditionStatus::fails) return ConditionStatus::fails;
    if (x == ConditionStatus::holds && y == ConditionStatus::holds) return ConditionStatus::holds;
    return ConditionStatus::inconclusive;
}

}  // namespace detail

template <RealNumber Real>
RegimeReport regime_report(const Economy<Real>& econ, const SteadyStateReport<Real>& ss, std::size_t T) {
    if (T < 2) throw std::invalid_argument("regime_report: horizon must be at least 2");
    RegimeReport rep;
    rep.T = T;
    const double G = to_double(econ.G);
    const auto gd = dividend_growth_estimate(econ.dividends, econ.G, T);
    const double margin = gd.exact ? kExactMargin : kEstimateMargin;
    const bool have_K = !ss.bubbleless.empty();
    const double R = to_double(ss.R);

    // (a) sum of detrended dividends diverges: all equilibria bubbleless.
    {
        Condition c;
        c.name = "dividend_sum_diverges";
        double partial = 0;
        for (std::size_t t = 1; t <= T; ++t) partial += to_double(econ.dividends.at(t));
        c.values = {{"partial_sum", partial}, {"G_d", gd.value}, {"G", G}, {"G_d_exact", gd.exact ? 1.0 : 0.0}};
        if (econ.dividends.zero_through(T) && gd.exact) {
            c.status = ConditionStatus::fails;
            c.note = "zero dividends";
        } else {
            // d_t = D_t / G^t: diverges when G_d > G, summable when G_d < G.
            c.status = detail::compare_less(G, gd.value, margin);
            c.note = "judged from the dividend growth rate relative to G";
        }
        rep.conditions.push_back(std::move(c));
    }

    // (b) R* > G along the no-asset path: unique equilibrium, bubbleless.
    const auto diamond = diamond_reference(econ, T);
    {
        Condition c;
        c.name = "diamond_rate_exceeds_G";
        const double Rstar = to_double(diamond.R_limit);
        c.values = {{"k_star", to_double(diamond.k_limit)}, {"R_star", Rstar}, {"G", G},
                    {"monotone", diamond.monotone ? 1.0 : 0.0}};
        c.status = detail::compare_less(G, Rstar, kEstimateMargin);
        c.note = "R* taken at the horizon of the no-asset path";
        rep.conditions.push_back(std::move(c));
    }

    // (c) R < G_d < G: unique equilibrium, bubbleless with k -> 0 or asymptotically bubbly.
    {
        Condition c;
        c.name = "R_below_Gd_below_G";
        c.values = {{"R", R}, {"G_d", gd.value}, {"G", G}, {"G_d_exact", gd.exact ? 1.0 : 0.0}};
        if (!have_K) {
            c.status = ConditionStatus::inconclusive;
            c.note = "no bubbleless steady state found";
        } else {
            c.status = detail::both(detail::compare_less(R, gd.value, margin), detail::compare_less(gd.value, G, margin));
            c.note = gd.exact ? "G_d declared" : "G_d estimated over the horizon";
        }
        rep.conditions.push_back(std::move(c));
    }

    // (d) capital over-accumulation: sup over steady states of f'(k) < G.
    {
        Condition c;
        c.name = "over_accumulation";
        c.values = {{"R", R}, {"G", G}};
        if (!have_K) {
            c.status = ConditionStatus::inconclusive;
            c.note = "no bubbleless steady state found";
        } else {
            c.status = detail::compare_less(R, G, kExactMargin);
        }
        rep.conditions.push_back(std::move(c));
    }

    // (e) sum_t D_t / R_m^t <= p(k_0) under the accompanying hypotheses:
    // bubbleless equilibria keep k_t >= k_0; with summability only the
    // continuum case remains.
    {
        Condition c;
        c.name = "dividends_below_steady_state_price";
        const auto pt0 = econ.tech.eval(econ.k0);
        const double f0 = to_double(pt0.fprime);
        const bool h_rate = f0 <= G;
        const double g00 = to_double(*transition(econ, econ.k0, Real(0)));
        const bool h_grow = g00 > to_double(econ.k0);
        bool h_below = have_K;
        if (have_K) {
            const double kmin = to_double(ss.bubbleless.front());
            for (int i = 0; i < 64 && h_below; ++i) {
                const double k = kmin * std::pow(1e-8, 1.0 - i / 64.0);
                h_below = to_double(*transition(econ, Real(k), Real(0))) > k;
            }
        }
        const double kbar = have_K ? to_double(ss.bubbleless.back()) : to_double(econ.k0);
        const double km = std::max(to_double(econ.k0), kbar);
        const double Rm = to_double(econ.tech.fprime(Real(km)));
        const double pk0 = to_double(p_of_k(econ, econ.k0));

        // sum_{t<=T} d_t (G / R_m)^t
        double lhs = 0, factor = 1;
        for (std::size_t t = 1; t <= T; ++t) {
            factor *= G / Rm;
            lhs += to_double(econ.dividends.at(t)) * factor;
        }
        std::optional<double> tail;
        if (econ.dividends.zero_through(10 * T)) {
            tail = 0.0;
        } else if (gd.exact && gd.value < Rm) {
            const double r = gd.value / Rm;
            tail = to_double(econ.dividends.at(T)) * factor * r / (1 - r);
        }
        const bool summable = diamond.summable;
        c.values = {{"lhs_partial", lhs},
                    {"lhs_tail_bound", tail.value_or(std::numeric_limits<double>::quiet_NaN())},
                    {"p_k0", pk0},
                    {"R_m", Rm},
                    {"k_m", km},
                    {"fprime_k0_le_G", h_rate ? 1.0 : 0.0},
                    {"g_k0_gt_k0", h_grow ? 1.0 : 0.0},
                    {"g_gt_k_below_min_K", h_below ? 1.0 : 0.0},
                    {"no_asset_sum_finite", summable ? 1.0 : 0.0}};
        if (!(h_rate && h_grow && h_below)) {
            c.status = ConditionStatus::fails;
            c.note = "hypotheses on k_0 not met";
        } else if (lhs > pk0) {
            c.status = ConditionStatus::fails;
            c.note = "partial sum already exceeds p(k_0)";
        } else if (tail && lhs + *tail <= pk0) {
            c.status = ConditionStatus::holds;
            c.note = summable ? "continuum of equilibria; the smallest price is bubbleless"
                              : "bubbleless equilibria keep k_t >= k_0";
        } else {
            c.status = ConditionStatus::inconclusive;
            c.note = "no certified bound on the remainder";
        }
        rep.conditions.push_back(std::move(c));
    }
    return rep;
}

}  // namespace olg
