#include "commands.hpp"

#include "olg/closedform.hpp"
#include "olg/config.hpp"
#include "olg/dynamics.hpp"
#include "olg/equilibria.hpp"
#include "olg/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <ostream>

namespace olg::cli {

namespace {

namespace fs = std::filesystem;

Json precision_json(unsigned digits) {
    if (digits == 0) return {{"mode", "double"}};
    return {{"mode", "multiprecision"}, {"digits", digits}};
}

int exit_for(SimStatus s) {
    switch (s) {
        case SimStatus::completed: return kOk;
        case SimStatus::fail_low: return kFailLow;
        case SimStatus::fail_high: return kFailHigh;
    }
    return kOk;
}

/// Runs `fn.template operator()<Real>()` at the precision the scenario asks
/// for. With precision = auto, double is tried first and the digit count is
/// doubled until `accept` holds for the result.
template <class Fn, class Accept>
auto at_precision(const PrecisionConfig& pc, Fn&& fn, Accept&& accept, unsigned auto_cap = kMaxDigits) {
    using Result = decltype(fn.template operator()<double>());
    auto in_digits = [&](unsigned digits) {
        ScopedDigits guard(digits);
        return fn.template operator()<mp_real>();
    };
    switch (pc.mode) {
        case PrecisionMode::fixed_double: return std::pair<Result, unsigned>{fn.template operator()<double>(), 0};
        case PrecisionMode::fixed_digits: return std::pair<Result, unsigned>{in_digits(pc.digits), pc.digits};
        case PrecisionMode::automatic: break;
    }
    Result r = fn.template operator()<double>();
    if (accept(r)) return std::pair<Result, unsigned>{std::move(r), 0};
    unsigned used = 0;
    std::optional<Result> last;
    choose_digits(
        [&](unsigned digits) {
            last = in_digits(digits);
            used = digits;
            return std::pair<std::size_t, bool>{accept.periods(*last), accept(*last)};
        },
        kMinDigits, auto_cap);
    return std::pair<Result, unsigned>{std::move(*last), used};
}

// ---------------------------------------------------------------------------
// simulate

struct SimResult {
    Trajectory<double> traj;
    TrajectoryResiduals residuals;
    double p0 = 0;
};

struct SimAccept {
    bool operator()(const SimResult& r) const { return r.traj.completed(); }
    std::size_t periods(const SimResult& r) const { return r.traj.completed() ? r.traj.horizon : r.traj.fail_t; }
};

SimResult simulate_at(const Scenario& sc, std::optional<double> p0_override, std::size_t T, unsigned& digits) {
    auto fn = [&]<RealNumber Real>() {
        std::optional<Construction<Real>> cons;
        const auto econ = build_economy<Real>(sc, T, &cons);
        Real p0 = p0_override ? Real(*p0_override) : (sc.run.p0_constructed ? cons->p0 : Real(*sc.run.p0));
        const auto traj = simulate(econ, p0, T);
        return SimResult{to_double(traj), trajectory_residuals(econ, traj), to_double(p0)};
    };
    auto [result, used] = at_precision(sc.run.precision, fn, SimAccept{});
    digits = used;
    return result;
}

Json residuals_json(const TrajectoryResiduals& r) {
    return {{"market_clearing", r.market_clearing}, {"price_recursion", r.price_recursion},
            {"no_arbitrage", r.no_arbitrage},       {"min_bubble", r.min_bubble},
            {"capital_bound", r.max_capital_bound}, {"price_bound", r.max_price_bound}};
}

int cmd_simulate(const Scenario& sc, const fs::path& out_dir, std::ostream& out) {
    const std::size_t T = sc.run.horizon;
    if (!sc.run.p0 && !sc.run.p0_constructed && !sc.run.p0_range) {
        throw ConfigError("[run] p0 or p0_range is required for simulate");
    }
    Json summary;
    int code = kOk;
    if (sc.run.p0_range) {
        const auto [lo, hi, count] = *sc.run.p0_range;
        const auto n = static_cast<std::size_t>(count);
        Json sweep = Json::array();
        std::optional<SimResult> keep;
        for (std::size_t i = 0; i < n; ++i) {
            const double p0 = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
            unsigned digits = 0;
            auto r = simulate_at(sc, p0, T, digits);
            Json row = summary_json(r.traj);
            row["p0"] = p0;
            row["precision"] = precision_json(digits);
            sweep.push_back(std::move(row));
            // Keep the largest surviving price, or the first probe when none survives.
            if (!keep || r.traj.completed()) keep = std::move(r);
        }
        write_trajectory_csv(out_dir / "trajectory.csv", keep->traj);
        summary = summary_json(keep->traj);
        summary["p0"] = keep->p0;
        summary["sweep"] = std::move(sweep);
    } else {
        unsigned digits = 0;
        const auto r = simulate_at(sc, std::nullopt, T, digits);
        write_trajectory_csv(out_dir / "trajectory.csv", r.traj);
        summary = summary_json(r.traj);
        summary["p0"] = r.p0;
        summary["precision"] = precision_json(digits);
        summary["residuals"] = residuals_json(r.residuals);
        code = exit_for(r.traj.status);
    }
    summary["command"] = "simulate";
    summary["scenario"] = sc.name;
    write_json(out_dir / "summary.json", summary);
    out << "simulate: " << summary["status"].get<std::string>() << " (T = " << T << ")\n";
    return code;
}

// ---------------------------------------------------------------------------
// eqset

struct EqAccept {
    bool operator()(const EquilibriumSet<double>& s) const { return s.survivor_found; }
    std::size_t periods(const EquilibriumSet<double>& s) const {
        return s.upper_path.completed() ? s.T : s.upper_path.fail_t;
    }
};

/// Digit cap for precision = auto in eqset; each step reruns every probe.
inline constexpr unsigned kEqSetAutoCap = 256;

int cmd_eqset(const Scenario& sc, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
    const std::size_t T = sc.run.horizon;
    auto fn = [&]<RealNumber Real>() {
        const auto econ = build_economy<Real>(sc, 2 * T + 1);
        return to_double(equilibrium_set(econ, T, sc.run.tol, EqSetOptions{true, sc.run.sensitivity}));
    };
    auto [set, digits] = at_precision(sc.run.precision, fn, EqAccept{}, kEqSetAutoCap);

    Json j = eqset_json(set);
    j["command"] = "eqset";
    j["scenario"] = sc.name;
    j["tol"] = sc.run.tol;
    j["precision"] = precision_json(digits);
    write_json(out_dir / "eqset.json", j);
    write_trajectory_csv(out_dir / "trajectory.csv", set.upper_path);
    write_trajectory_csv(out_dir / "trajectory_lower.csv", set.lower_path);
    if (!set.survivor_found) {
        err << "eqset: no initial price survives " << T
            << " periods at this precision; endpoints mark where fail_low and fail_high meet\n";
    }
    out << "eqset: [" << j["p_lower"].get<double>() << ", " << j["p_upper"].get<double>() << "] (T = " << T << ")\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// construct

struct ConstructedView {
    Economy<double> econ;
    Trajectory<double> traj;
    std::size_t horizon;
};

ConstructedView constructed_view(const Construction<double>& cons, std::size_t T) {
    if (cons.theta) {
        const auto& th = *cons.theta;
        auto econ = shifted_economy(th);
        const auto off = static_cast<std::ptrdiff_t>(th.t0);
        std::vector<double> k(th.k.begin() + off, th.k.end());
        std::vector<double> p(th.p.begin() + off, th.p.end());
        std::vector<double> d(th.d.begin() + off, th.d.end());
        d[0] = 0;
        const std::size_t horizon = T - th.t0;
        auto traj = to_trajectory(econ, k, p, d, horizon);
        return {std::move(econ), std::move(traj), horizon};
    }
    auto econ = economy_for(cons.base);
    auto traj = to_trajectory(econ, cons.base.k, cons.base.p, cons.base.d, T);
    return {std::move(econ), std::move(traj), T};
}

Json spec_json(const XSequenceSpec<double>& s, double k0) {
    return {{"family", to_string(s.family)}, {"A", s.A},         {"alpha", s.alpha},   {"beta", s.beta},
            {"G", s.G},                     {"C", s.C},         {"sigma", s.ratio()}, {"rho", s.rho()},
            {"k0", k0}};
}

int cmd_construct(const Scenario& sc, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
    if (sc.dividends.source != DividendSource::constructed) {
        throw ConfigError("[dividends] kind must be 'constructed' for construct");
    }
    const std::size_t T = sc.run.horizon;
    const auto spec = make_spec<double>(sc);
    spec.validate();

    Json verify;
    verify["command"] = "construct";
    verify["scenario"] = sc.name;
    verify["parameters"] = spec_json(spec, sc.k0);
    verify["horizon"] = T;
    const auto fc = family_condition(spec);
    verify["family_condition"] = {{"statement", fc.statement}, {"holds", fc.holds}};
    if (auto v = check_x_sequence(spec, T)) {
        verify["x_sequence"] = {{"valid", false}, {"first_violation", v->index}, {"condition", v->condition},
                                {"value", number(v->value)}};
        write_json(out_dir / "verify.json", verify);
        err << "construct: x-sequence violates " << v->condition << " at t = " << v->index << '\n';
        return kConstructionViolation;
    }
    verify["x_sequence"] = {{"valid", true}, {"first_violation", nullptr}};

    const auto cons = build_construction<double>(sc, T);
    const auto view = constructed_view(cons, T);
    verify["closed_form_checks"] = construction_checks_json(cons.base.checks);
    verify["construction_digits"] = cons.base.digits;

    const auto replay = cons.theta ? oracle_replay_theta(spec, sc.k0, T, theta_options(sc), view.horizon)
                                   : oracle_replay(spec, sc.k0, T);
    verify["replay"] = replay_json(replay);
    verify["replay"]["within_1e-10"] =
        replay.status == SimStatus::completed && replay.max_rel_k <= 1e-10 && replay.max_rel_p <= 1e-10;

    const auto bt = bubble_test(view.traj);
    verify["montrucchio_sum"] = bt.partial_sums.back();
    verify["bubble_test"] = bubble_test_json(bt);

    // Growth of undetrended dividends at the horizon, G d_T^{1/T}.
    const std::size_t H = view.horizon;
    const double dH = view.traj.periods[H].d;
    verify["dividend_growth"] = {
        {"t", H},
        {"rate", dH > 0 ? number(sc.G * std::pow(dH, 1.0 / static_cast<double>(H))) : Json(nullptr)},
        {"declared", view.econ.dividends.declared_growth(view.econ.G) ? number(*view.econ.dividends.declared_growth(view.econ.G))
                                                                        : Json(nullptr)}};
    if (spec.family == XFamily::geometric_unbounded) {
        const auto [mu, nu] = exponents(spec.alpha, H);
        verify["exponents"] = {{"t", H}, {"mu", mu}, {"nu", nu}};
    }
    if (cons.theta) {
        const auto& th = *cons.theta;
        Json probed = Json::array();
        for (const auto& [theta, R] : th.probed) probed.push_back({{"theta", theta}, {"R_star", R}});
        verify["theta"] = {{"theta", th.theta}, {"t0", th.t0},          {"k_star", th.k_star},
                           {"R_star", th.R_star}, {"R_star_below_G", th.R_star < th.G}, {"probed", probed}};
    }
    write_json(out_dir / "verify.json", verify);
    write_trajectory_csv(out_dir / "trajectory.csv", view.traj);
    Json summary = summary_json(view.traj);
    summary["command"] = "construct";
    summary["scenario"] = sc.name;
    summary["p0"] = view.traj.periods[0].p;
    write_json(out_dir / "summary.json", summary);
    out << "construct: " << to_string(spec.family) << ", replay " << to_string(replay.status) << " max rel "
        << std::max(replay.max_rel_k, replay.max_rel_p) << " (" << replay.digits << " digits)\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// classify

int cmd_classify(const Scenario& sc, const fs::path& out_dir, std::ostream& out) {
    const std::size_t T = sc.run.horizon;
    std::optional<Construction<double>> cons;
    const auto econ = build_economy<double>(sc, 2 * T + 1, &cons);

    Trajectory<double> traj;
    std::string source;
    unsigned digits = 0;
    Json extra;
    if (cons) {
        traj = constructed_view(*cons, T).traj;
        source = "closed_form";
    } else if (sc.run.p0) {
        const auto r = simulate_at(sc, std::nullopt, T, digits);
        traj = r.traj;
        source = "simulate";
    } else {
        auto fn = [&]<RealNumber Real>() {
            const auto e = build_economy<Real>(sc, 2 * T + 1);
            return to_double(equilibrium_set(e, T, sc.run.tol, EqSetOptions{true, sc.run.sensitivity}));
        };
        auto [set, used] = at_precision(sc.run.precision, fn, EqAccept{}, kEqSetAutoCap);
        digits = used;
        traj = set.upper_path;
        source = "upper_endpoint";
        extra["p_lower"] = set.best_lower().value;
        extra["p_upper"] = set.best_upper().value;
    }

    Json summary = summary_json(traj);
    summary["command"] = "classify";
    summary["scenario"] = sc.name;
    summary["trajectory_source"] = source;
    summary["precision"] = precision_json(digits);
    write_json(out_dir / "summary.json", summary);
    if (!traj.completed()) return exit_for(traj.status);

    const auto ss = bubbleless_steady_states(econ);
    ClassifyOptions co;
    co.tol = sc.run.classify_tol;
    co.k_floor = sc.run.k_floor;
    co.R_ceiling = sc.run.R_ceiling;
    const auto cls = classify(traj, ss, econ, co);
    const auto bt = bubble_test(traj);
    const auto regime = regime_report(econ, ss, T);

    Json j = regime_json(regime);
    j["command"] = "classify";
    j["scenario"] = sc.name;
    j["trajectory_source"] = source;
    for (auto& [k, v] : extra.items()) j[k] = v;
    j["classification"] = classification_json(cls);
    j["bubble_test"] = bubble_test_json(bt);
    j["steady_states"] = steady_state_json(ss);
    write_json(out_dir / "regime.json", j);
    write_trajectory_csv(out_dir / "trajectory.csv", traj);
    out << "classify: " << to_string(cls.label) << ", bubble test " << to_string(bt.verdict) << '\n';
    return kOk;
}

int dispatch(const std::string& command, const Scenario& sc, const fs::path& out_dir, std::ostream& out,
             std::ostream& err) {
    if (command == "simulate") return cmd_simulate(sc, out_dir, out);
    if (command == "eqset") return cmd_eqset(sc, out_dir, out, err);
    if (command == "construct") return cmd_construct(sc, out_dir, out, err);
    if (command == "classify") return cmd_classify(sc, out_dir, out);
    throw ConfigError("unknown command '" + command + "'");
}

}  // namespace

int execute(const Options& opt, std::ostream& out, std::ostream& err) {
    try {
        Scenario sc;
        std::string command = opt.command;
        if (command == "preset") {
            if (!opt.preset) throw ConfigError("preset needs a name (fig1, fig2 or fig3)");
            sc = preset_scenario(*opt.preset);
        } else if (opt.config) {
            sc = load_scenario(*opt.config);
        } else {
            throw ConfigError(command + " needs --config <path>");
        }
        if (command.empty()) {
            if (!sc.run.command) throw ConfigError("no command given on the command line or in [run] command");
            command = *sc.run.command;
        }
        if (opt.horizon) {
            if (*opt.horizon < 1) throw ConfigError("--horizon must be positive");
            sc.run.horizon = *opt.horizon;
        }
        if (opt.tol) {
            if (!(*opt.tol > 0)) throw ConfigError("--tol must be positive");
            sc.run.tol = *opt.tol;
        }
        fs::create_directories(opt.out);

        if (command == "preset") {
            const int c = cmd_construct(sc, opt.out, out, err);
            if (c != kOk) return c;
            // classify rewrites trajectory.csv and summary.json with the same path.
            return cmd_classify(sc, opt.out, out);
        }
        return dispatch(command, sc, opt.out, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ConstructionError& e) {
        err << "construction error: " << e.what() << '\n';
        return kConstructionViolation;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Overlapping-generations economy with capital and a dividend-paying asset"};
    app.fallthrough();
    Options opt;
    std::string config, out_dir = ".";
    std::optional<std::size_t> horizon;
    std::optional<double> tol;
    app.add_option("--config", config, "scenario file");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--horizon", horizon, "number of periods T");
    app.add_option("--tol", tol, "bisection width for eqset");

    for (const char* name : {"simulate", "eqset", "construct", "classify"}) {
        app.add_subcommand(name, std::string(name) + " the configured scenario");
    }
    auto* preset = app.add_subcommand("preset", "construct and classify a built-in scenario");
    std::string preset_name;
    preset->add_option("name", preset_name, "fig1 | fig2 | fig3")->required();
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kConfigError;
    }
    const auto subs = app.get_subcommands();
    if (!subs.empty()) opt.command = subs.front()->get_name();
    if (opt.command == "preset") opt.preset = preset_name;
    if (!config.empty()) opt.config = config;
    opt.out = out_dir;
    opt.horizon = horizon;
    opt.tol = tol;
    return execute(opt, out, err);
}

}  // namespace olg::cli
