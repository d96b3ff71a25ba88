#include "olg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace olg {

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return os;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory<double>& traj) {
    os << "t,k,p,R,w,d,q,v,b\n";
    for (const auto& p : traj.periods) {
        os << p.t << ',' << fmt17(p.k) << ',' << fmt17(p.p) << ',' << fmt17(p.R) << ',' << fmt17(p.w) << ','
           << fmt17(p.d) << ',' << fmt17(p.q) << ',' << fmt17(p.v) << ',' << fmt17(p.b) << '\n';
    }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory<double>& traj) {
    auto os = open_out(path);
    write_trajectory_csv(os, traj);
}

void write_json(const std::filesystem::path& path, const Json& j) {
    auto os = open_out(path);
    os << j.dump(2) << '\n';
}

Json number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

Json summary_json(const Trajectory<double>& traj) {
    Json j;
    j["status"] = to_string(traj.status);
    j["T"] = traj.horizon;
    j["periods"] = traj.periods.empty() ? 0 : traj.periods.size() - 1;
    if (traj.status != SimStatus::completed) j["fail_t"] = traj.fail_t;
    if (!traj.periods.empty()) {
        const auto& last = traj.back();
        j["k_T"] = number(last.k);
        j["p_T"] = number(last.p);
        j["R_T"] = number(last.R);
        j["b_T"] = number(last.b);
        bool positive_prices = true;
        for (std::size_t t = 1; t < traj.periods.size(); ++t) positive_prices = positive_prices && traj.periods[t].p > 0;
        j["classification_ready"] = traj.completed();
        j["positive_prices"] = positive_prices;
    }
    j["fundamental_tail"] = {{"certified", traj.tail.certified},
                             {"bound", number(traj.tail.bound)},
                             {"min_rate", number(traj.tail.min_rate)}};
    return j;
}

Json steady_state_json(const SteadyStateReport<double>& ss) {
    Json j;
    j["bubbleless"] = ss.bubbleless;
    j["R"] = number(ss.R);
    j["rho"] = number(ss.rho);
    if (ss.bubbly) {
        j["bubbly"] = {{"k", ss.bubbly->k}, {"p", ss.bubbly->p}};
    } else {
        j["bubbly"] = nullptr;
    }
    if (ss.golden) j["golden_rule"] = {{"k", ss.golden->k}, {"p", ss.golden->p}};
    j["k_max"] = ss.k_max;
    j["grid_n"] = ss.grid_n;
    j["warnings"] = ss.warnings;
    return j;
}

Json eqset_json(const EquilibriumSet<double>& s) {
    Json j;
    j["p_lower"] = s.best_lower().value;
    j["p_lower_width"] = s.best_lower().width;
    j["p_upper"] = s.best_upper().value;
    j["p_upper_width"] = s.best_upper().width;
    j["T"] = s.T;
    j["survivor_found"] = s.survivor_found;
    j["pure_bubble"] = s.pure_bubble;
    j["p_cap"] = s.p_cap;
    Json sens;
    sens["T"] = {{"p_lower", s.lower.value}, {"p_lower_width", s.lower.width},
                 {"p_upper", s.upper.value}, {"p_upper_width", s.upper.width}};
    if (s.lower_2T && s.upper_2T) {
        sens["2T"] = {{"p_lower", s.lower_2T->value}, {"p_lower_width", s.lower_2T->width},
                      {"p_upper", s.upper_2T->value}, {"p_upper_width", s.upper_2T->width}};
        sens["lower_shift"] = s.lower_2T->value - s.lower.value;
        sens["upper_shift"] = s.upper_2T->value - s.upper.value;
    }
    j["sensitivity"] = std::move(sens);
    j["lower_path"] = summary_json(s.lower_path);
    j["upper_path"] = summary_json(s.upper_path);
    Json probes = Json::array();
    for (const auto& [p, st] : s.finest_probes) probes.push_back({{"p0", p}, {"status", to_string(st)}});
    j["finest_probes"] = std::move(probes);
    j["probes"] = s.probes;
    return j;
}

Json classification_json(const Classification& c) {
    Json j;
    j["label"] = to_string(c.label);
    j["k_T"] = number(c.k_T);
    j["p_T"] = number(c.p_T);
    j["R_T"] = number(c.R_T);
    j["montrucchio_sum"] = c.montrucchio_sum ? number(*c.montrucchio_sum) : Json(nullptr);
    if (c.target) {
        j["target"] = {{"name", c.target->name}, {"k", c.target->k}, {"p", c.target->p},
                       {"distance", c.target->distance}};
    } else {
        j["target"] = nullptr;
    }
    j["thresholds"] = {{"tol", c.tol}, {"k_floor", c.k_floor}, {"R_ceiling", c.R_ceiling}};
    return j;
}

Json bubble_test_json(const BubbleTest& b) {
    Json j;
    j["verdict"] = to_string(b.verdict);
    j["partial_sum"] = b.partial_sums.empty() ? Json(nullptr) : number(b.partial_sums.back());
    j["tail_bound"] = b.tail_bound ? number(*b.tail_bound) : Json(nullptr);
    j["ratio"] = number(b.ratio);
    j["min_increment"] = number(b.min_increment);
    j["reason"] = b.reason;
    return j;
}

Json regime_json(const RegimeReport& r) {
    Json j;
    j["T"] = r.T;
    Json conds = Json::array();
    for (const auto& c : r.conditions) {
        Json values;
        for (const auto& [k, v] : c.values) values[k] = number(v);
        conds.push_back({{"name", c.name}, {"status", to_string(c.status)}, {"values", values}, {"note", c.note}});
    }
    j["conditions"] = std::move(conds);
    return j;
}

Json replay_json(const ReplayReport& r) {
    return {{"status", to_string(r.status)},
            {"horizon", r.horizon},
            {"fail_t", r.fail_t},
            {"max_rel_k", r.max_rel_k},
            {"max_rel_p", r.max_rel_p},
            {"digits", r.digits}};
}

Json construction_checks_json(const ConstructionChecks& c) {
    return {{"capital_closed_form", c.capital_closed_form},
            {"dividend_closed_form", c.dividend_closed_form},
            {"ratio_closed_form", c.ratio_closed_form},
            {"min_price", c.min_price},
            {"min_dividend", c.min_dividend}};
}

}  // namespace olg
