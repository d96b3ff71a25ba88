#include "olg/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace olg {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_plain(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    double v = 0;
    const auto* first = t.data();
    const auto* last = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (t.empty() || ec != std::errc() || ptr != last) {
        throw ConfigError(where + ": '" + text + "' is not a number");
    }
    return v;
}

const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"scenario", {"name", "preset"}},
        {"economy", {"G", "technology", "A", "alpha", "delta", "theta", "savings", "beta", "gamma", "k0"}},
        {"dividends",
         {"kind", "d0", "gamma", "values", "tail", "tail_ratio", "declared_Gd", "family", "C", "sigma", "theta"}},
        {"run",
         {"command", "p0", "p0_range", "horizon", "tol", "precision", "sensitivity", "classify_tol", "k_floor",
          "R_ceiling"}},
    };
    return keys;
}

struct Reader {
    const pt::ptree& tree;
    std::string source;

    std::optional<std::string> get(const std::string& section, const std::string& key) const {
        const auto sec = tree.get_child_optional(section);
        if (!sec) return std::nullopt;
        const auto val = sec->get_optional<std::string>(key);
        if (!val) return std::nullopt;
        return trim(*val);
    }

    std::string where(const std::string& section, const std::string& key) const {
        return source + ": [" + section + "] " + key;
    }

    std::optional<double> number(const std::string& section, const std::string& key) const {
        const auto v = get(section, key);
        if (!v) return std::nullopt;
        return parse_number(*v, where(section, key));
    }
};

void check_keys(const pt::ptree& tree, const std::string& source) {
    for (const auto& [section, body] : tree) {
        if (!body.data().empty()) throw ConfigError(source + ": key '" + section + "' outside any section");
        const auto it = allowed_keys().find(section);
        if (it == allowed_keys().end()) throw ConfigError(source + ": unknown section [" + section + "]");
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) throw ConfigError(source + ": [" + section + "] unknown key '" + key + "'");
            if (!value.empty()) throw ConfigError(source + ": [" + section + "] " + key + " has nested keys");
        }
    }
}

void apply(const Reader& r, Scenario& sc) {
    if (auto v = r.get("scenario", "name")) sc.name = *v;

    // economy
    if (auto v = r.number("economy", "G")) sc.G = *v;
    if (auto v = r.get("economy", "technology")) {
        const auto s = lower(*v);
        if (s == "cobb_douglas") {
            sc.tech.kind = TechnologyKind::cobb_douglas;
        } else if (s == "cd_plus_log") {
            sc.tech.kind = TechnologyKind::cd_plus_log;
        } else {
            throw ConfigError(r.where("economy", "technology") + ": expected cobb_douglas or cd_plus_log, got '" +
                              *v + "'");
        }
    }
    if (auto v = r.get("economy", "A")) {
        if (lower(*v) == "normalized") {
            sc.tech.A_normalized = true;
        } else {
            sc.tech.A_normalized = false;
            sc.tech.A = parse_number(*v, r.where("economy", "A"));
        }
    }
    if (auto v = r.number("economy", "alpha")) sc.tech.alpha = *v;
    if (auto v = r.number("economy", "delta")) sc.tech.delta = *v;
    if (auto v = r.number("economy", "theta")) sc.tech.theta = *v;
    if (auto v = r.get("economy", "savings")) {
        const auto s = lower(*v);
        if (s == "log") {
            sc.savings.kind = SavingsKind::log;
        } else if (s == "crra") {
            sc.savings.kind = SavingsKind::separable;
        } else {
            throw ConfigError(r.where("economy", "savings") + ": expected log or crra, got '" + *v + "'");
        }
    }
    if (auto v = r.number("economy", "beta")) sc.savings.beta = *v;
    if (auto v = r.number("economy", "gamma")) sc.savings.gamma = *v;
    if (auto v = r.number("economy", "k0")) sc.k0 = *v;

    // dividends
    auto& d = sc.dividends;
    if (auto v = r.get("dividends", "kind")) {
        const auto s = lower(*v);
        if (s == "zero") {
            d.source = DividendSource::zero;
        } else if (s == "geometric") {
            d.source = DividendSource::geometric;
        } else if (s == "explicit") {
            d.source = DividendSource::explicit_sequence;
        } else if (s == "constructed") {
            d.source = DividendSource::constructed;
        } else {
            throw ConfigError(r.where("dividends", "kind") + ": expected zero, geometric, explicit or constructed");
        }
        // an inherited p0 = constructed has no meaning once the kind changes
        if (d.source != DividendSource::constructed) sc.run.p0_constructed = false;
    }
    if (auto v = r.number("dividends", "d0")) d.d0 = *v;
    if (auto v = r.number("dividends", "gamma")) d.gamma = *v;
    if (auto v = r.get("dividends", "values")) {
        d.values.clear();
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) d.values.push_back(parse_number(item, r.where("dividends", "values")));
    }
    if (auto v = r.get("dividends", "tail")) {
        const auto s = lower(*v);
        if (s == "zero") {
            d.tail = DividendTail::zero;
        } else if (s == "geometric") {
            d.tail = DividendTail::geometric;
        } else {
            throw ConfigError(r.where("dividends", "tail") + ": expected zero or geometric");
        }
    }
    if (auto v = r.number("dividends", "tail_ratio")) d.tail_ratio = *v;
    if (auto v = r.number("dividends", "declared_Gd")) d.declared_Gd = *v;
    if (auto v = r.get("dividends", "family")) {
        const auto s = lower(*v);
        if (s == "geometric_unbounded") {
            d.family = XFamily::geometric_unbounded;
        } else if (s == "one_plus_geometric") {
            d.family = XFamily::one_plus_geometric;
        } else if (s == "rho_plus_geometric") {
            d.family = XFamily::rho_plus_geometric;
        } else {
            throw ConfigError(r.where("dividends", "family") +
                              ": expected geometric_unbounded, one_plus_geometric or rho_plus_geometric");
        }
    }
    if (auto v = r.get("dividends", "C")) {
        if (lower(*v) == "one_plus_rho") {
            d.C_one_plus_rho = true;
        } else {
            d.C_one_plus_rho = false;
            d.C = parse_number(*v, r.where("dividends", "C"));
        }
    }
    if (auto v = r.get("dividends", "sigma")) {
        if (lower(*v) == "rho") {
            d.sigma_is_rho = true;
        } else {
            d.sigma_is_rho = false;
            d.sigma = parse_number(*v, r.where("dividends", "sigma"));
        }
    }
    if (auto v = r.get("dividends", "theta")) {
        const auto s = lower(*v);
        if (s == "none") {
            d.theta_variant = false;
            d.theta.reset();
        } else if (s == "auto") {
            d.theta_variant = true;
            d.theta.reset();
        } else {
            d.theta_variant = true;
            d.theta = parse_number(*v, r.where("dividends", "theta"));
        }
    }

    // run
    auto& run = sc.run;
    if (auto v = r.get("run", "command")) run.command = lower(*v);
    if (auto v = r.get("run", "p0")) {
        if (lower(*v) == "constructed") {
            run.p0_constructed = true;
            run.p0.reset();
        } else {
            run.p0_constructed = false;
            run.p0 = parse_number(*v, r.where("run", "p0"));
        }
    }
    if (auto v = r.get("run", "p0_range")) {
        std::stringstream ss(*v);
        std::string item;
        std::vector<double> parts;
        while (std::getline(ss, item, ',')) parts.push_back(parse_number(item, r.where("run", "p0_range")));
        if (parts.size() != 3) throw ConfigError(r.where("run", "p0_range") + ": expected 'lo, hi, count'");
        run.p0_range = std::array<double, 3>{parts[0], parts[1], parts[2]};
    }
    if (auto v = r.number("run", "horizon")) {
        if (!(*v >= 1) || *v != std::floor(*v) || *v > 1e7) {
            throw ConfigError(r.where("run", "horizon") + ": expected a positive integer");
        }
        run.horizon = static_cast<std::size_t>(*v);
    }
    if (auto v = r.number("run", "tol")) run.tol = *v;
    if (auto v = r.get("run", "precision")) {
        const auto s = lower(*v);
        if (s == "double") {
            run.precision = {PrecisionMode::fixed_double, 0};
        } else if (s == "auto") {
            run.precision = {PrecisionMode::automatic, 0};
        } else {
            const double digits = parse_number(*v, r.where("run", "precision"));
            if (!(digits >= 16 && digits <= kMaxDigits) || digits != std::floor(digits)) {
                throw ConfigError(r.where("run", "precision") + ": expected double, auto or a digit count in [16, " +
                                  std::to_string(kMaxDigits) + "]");
            }
            run.precision = {PrecisionMode::fixed_digits, static_cast<unsigned>(digits)};
        }
    }
    if (auto v = r.get("run", "sensitivity")) {
        const auto s = lower(*v);
        if (s == "true" || s == "1" || s == "yes") {
            run.sensitivity = true;
        } else if (s == "false" || s == "0" || s == "no") {
            run.sensitivity = false;
        } else {
            throw ConfigError(r.where("run", "sensitivity") + ": expected true or false");
        }
    }
    if (auto v = r.number("run", "classify_tol")) run.classify_tol = *v;
    if (auto v = r.number("run", "k_floor")) run.k_floor = *v;
    if (auto v = r.number("run", "R_ceiling")) run.R_ceiling = *v;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

void validate(const Scenario& sc, const std::string& source) {
    const std::string s = source + ": ";
    require(sc.G > 0, s + "[economy] G must be positive");
    require(sc.tech.alpha > 0 && sc.tech.alpha < 1, s + "[economy] alpha must lie in (0,1)");
    require(sc.tech.delta >= 0 && sc.tech.delta <= 1, s + "[economy] delta must lie in [0,1]");
    require(sc.tech.theta >= 0, s + "[economy] theta must be nonnegative");
    require(sc.savings.beta > 0 && sc.savings.beta < 1, s + "[economy] beta must lie in (0,1)");
    require(sc.savings.gamma > 0, s + "[economy] gamma must be positive");
    require(sc.k0 > 0, s + "[economy] k0 must be positive");
    require(sc.A() > 0, s + "[economy] A must be positive");
    if (sc.tech.kind == TechnologyKind::cobb_douglas) {
        require(1 - sc.tech.delta < sc.G, s + "[economy] 1 - delta must be below G");
    }
    const auto& d = sc.dividends;
    require(d.d0 >= 0 && d.gamma >= 0 && d.tail_ratio >= 0, s + "[dividends] levels and ratios must be nonnegative");
    for (double v : d.values) require(v >= 0, s + "[dividends] values must be nonnegative");
    if (d.declared_Gd) require(*d.declared_Gd >= 0, s + "[dividends] declared_Gd must be nonnegative");
    if (d.source == DividendSource::constructed) {
        require(sc.tech.kind == TechnologyKind::cobb_douglas && sc.tech.delta == 1,
                s + "[dividends] constructed paths need cobb_douglas technology with delta = 1");
        require(sc.savings.kind == SavingsKind::log, s + "[dividends] constructed paths need log savings");
        require(d.sigma_is_rho || d.sigma > 0, s + "[dividends] sigma must be positive");
        if (d.theta) require(*d.theta >= 0, s + "[dividends] theta must be nonnegative");
        if (d.theta_variant) {
            require(d.family == XFamily::geometric_unbounded && sc.tech.alpha > 0.5,
                    s + "[dividends] theta needs family geometric_unbounded and alpha > 1/2");
        }
    } else {
        require(!d.theta_variant, s + "[dividends] theta applies to constructed dividends only");
    }
    const auto& run = sc.run;
    require(run.tol > 0, s + "[run] tol must be positive");
    if (run.p0) require(*run.p0 >= 0, s + "[run] p0 must be nonnegative");
    if (run.p0_constructed) {
        require(d.source == DividendSource::constructed, s + "[run] p0 = constructed needs constructed dividends");
    }
    if (run.p0_range) {
        const auto& r = *run.p0_range;
        require(r[0] >= 0 && r[0] <= r[1], s + "[run] p0_range needs 0 <= lo <= hi");
        require(r[2] >= 2 && r[2] == std::floor(r[2]) && r[2] <= 1e6, s + "[run] p0_range count must be an integer >= 2");
    }
    if (run.classify_tol) require(*run.classify_tol > 0, s + "[run] classify_tol must be positive");
    require(run.k_floor > 0, s + "[run] k_floor must be positive");
    if (run.R_ceiling) require(*run.R_ceiling > 0, s + "[run] R_ceiling must be positive");
}

const std::map<std::string, std::string>& presets() {
    static const std::map<std::string, std::string> texts = {
        {"fig1",
         "; Capital falls to zero while the asset stays bubbleless.\n"
         "[scenario]\n"
         "name = fig1\n"
         "\n"
         "[economy]\n"
         "G = 1\n"
         "technology = cobb_douglas\n"
         "A = normalized\n"
         "alpha = 2/3\n"
         "delta = 1\n"
         "savings = log\n"
         "beta = 1/2\n"
         "k0 = 1\n"
         "\n"
         "[dividends]\n"
         "kind = constructed\n"
         "family = geometric_unbounded\n"
         "C = one_plus_rho\n"
         "sigma = 11/10\n"
         "\n"
         "[run]\n"
         "p0 = constructed\n"
         "horizon = 200\n"},
        {"fig2",
         "; Asymptotically bubbly path converging to the golden-rule capital.\n"
         "[scenario]\n"
         "name = fig2\n"
         "\n"
         "[economy]\n"
         "G = 1\n"
         "technology = cobb_douglas\n"
         "A = normalized\n"
         "alpha = 1/3\n"
         "delta = 1\n"
         "savings = log\n"
         "beta = 2/3\n"
         "k0 = 1\n"
         "\n"
         "[dividends]\n"
         "kind = constructed\n"
         "family = one_plus_geometric\n"
         "C = 1\n"
         "sigma = 9/10\n"
         "\n"
         "[run]\n"
         "p0 = constructed\n"
         "horizon = 200\n"},
        {"fig3",
         "; Bubbly path whose bubble vanishes relative to the economy.\n"
         "[scenario]\n"
         "name = fig3\n"
         "\n"
         "[economy]\n"
         "G = 1\n"
         "technology = cobb_douglas\n"
         "A = normalized\n"
         "alpha = 1/3\n"
         "delta = 1\n"
         "savings = log\n"
         "beta = 2/3\n"
         "k0 = 1\n"
         "\n"
         "[dividends]\n"
         "kind = constructed\n"
         "family = rho_plus_geometric\n"
         "C = 1\n"
         "sigma = rho\n"
         "\n"
         "[run]\n"
         "p0 = constructed\n"
         "horizon = 200\n"},
    };
    return texts;
}

Scenario parse_tree(const pt::ptree& tree, const std::string& source) {
    check_keys(tree, source);
    const Reader r{tree, source};
    Scenario sc;
    if (auto p = r.get("scenario", "preset")) sc = preset_scenario(*p);
    apply(r, sc);
    validate(sc, source);
    return sc;
}

}  // namespace

double parse_number(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    const auto slash = t.find('/');
    double v = 0;
    if (slash == std::string::npos) {
        v = parse_plain(t, where);
    } else {
        const double num = parse_plain(t.substr(0, slash), where);
        const double den = parse_plain(t.substr(slash + 1), where);
        if (den == 0) throw ConfigError(where + ": zero denominator in '" + text + "'");
        v = num / den;
    }
    if (!std::isfinite(v)) throw ConfigError(where + ": '" + text + "' is not finite");
    return v;
}

Scenario parse_scenario(std::istream& is, const std::string& source) {
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source + ": line " + std::to_string(e.line()) + ": " + e.message());
    }
    return parse_tree(tree, source);
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    return parse_scenario(is, path.string());
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"fig1", "fig2", "fig3"};
    return names;
}

const std::string& preset_text(const std::string& name) {
    const auto it = presets().find(name);
    if (it == presets().end()) throw ConfigError("unknown preset '" + name + "' (expected fig1, fig2 or fig3)");
    return it->second;
}

Scenario preset_scenario(const std::string& name) {
    std::istringstream is(preset_text(name));
    pt::ptree tree;
    pt::read_ini(is, tree);
    check_keys(tree, "preset " + name);
    const Reader r{tree, "preset " + name};
    Scenario sc;
    apply(r, sc);
    validate(sc, "preset " + name);
    return sc;
}

}  // namespace olg
