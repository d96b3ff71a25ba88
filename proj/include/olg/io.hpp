#pragma once

// CSV and JSON serialization. All writers take double-valued records so the
// output does not depend on the precision a result was computed in.

#include "olg/closedform.hpp"
#include "olg/dynamics.hpp"
#include "olg/equilibria.hpp"
#include "olg/numeric.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace olg {

using Json = nlohmann::ordered_json;

template <RealNumber Real>
Trajectory<double> to_double(const Trajectory<Real>& traj) {
    if constexpr (std::is_same_v<Real, double>) {
        return traj;
    } else {
        Trajectory<double> out;
        out.horizon = traj.horizon;
        out.status = traj.status;
        out.fail_t = traj.fail_t;
        out.tail = {traj.tail.certified, to_double(traj.tail.bound), to_double(traj.tail.min_rate)};
        out.periods.reserve(traj.periods.size());
        for (const auto& p : traj.periods) {
            out.periods.push_back(Period<double>{p.t, to_double(p.k), to_double(p.p), to_double(p.R), to_double(p.w),
                                                 to_double(p.d), to_double(p.q), to_double(p.v), to_double(p.b)});
        }
        return out;
    }
}

template <RealNumber Real>
EquilibriumSet<double> to_double(const EquilibriumSet<Real>& s) {
    if constexpr (std::is_same_v<Real, double>) {
        return s;
    } else {
        auto ep = [](const EndpointSearch<Real>& e) {
            return EndpointSearch<double>{to_double(e.value), to_double(e.width), e.iterations};
        };
        EquilibriumSet<double> out;
        out.T = s.T;
        out.p_cap = to_double(s.p_cap);
        out.lower = ep(s.lower);
        out.upper = ep(s.upper);
        out.pure_bubble = s.pure_bubble;
        out.survivor_found = s.survivor_found;
        if (s.lower_2T) out.lower_2T = ep(*s.lower_2T);
        if (s.upper_2T) out.upper_2T = ep(*s.upper_2T);
        out.lower_path = to_double(s.lower_path);
        out.upper_path = to_double(s.upper_path);
        out.finest_probes = s.finest_probes;
        out.probes = s.probes;
        return out;
    }
}

template <RealNumber Real>
SteadyStateReport<double> to_double(const SteadyStateReport<Real>& s) {
    if constexpr (std::is_same_v<Real, double>) {
        return s;
    } else {
        SteadyStateReport<double> out;
        for (const auto& k : s.bubbleless) out.bubbleless.push_back(to_double(k));
        out.R = to_double(s.R);
        out.rho = to_double(s.rho);
        if (s.bubbly) out.bubbly = BubblySteadyState<double>{to_double(s.bubbly->k), to_double(s.bubbly->p)};
        if (s.golden) out.golden = BubblySteadyState<double>{to_double(s.golden->k), to_double(s.golden->p)};
        out.k_max = to_double(s.k_max);
        out.grid_n = s.grid_n;
        out.warnings = s.warnings;
        return out;
    }
}

/// Header t,k,p,R,w,d,q,v,b; 17 significant digits; LF line endings.
void write_trajectory_csv(std::ostream& os, const Trajectory<double>& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory<double>& traj);

/// Writes `j` with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);

/// Finite doubles as numbers, non-finite as null.
Json number(double x);

Json summary_json(const Trajectory<double>& traj);
Json steady_state_json(const SteadyStateReport<double>& ss);
Json eqset_json(const EquilibriumSet<double>& s);
Json classification_json(const Classification& c);
Json bubble_test_json(const BubbleTest& b);
Json regime_json(const RegimeReport& r);
Json replay_json(const ReplayReport& r);
Json construction_checks_json(const ConstructionChecks& c);

}  // namespace olg
