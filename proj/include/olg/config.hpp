#pragma once

// Scenario files: INI-style sections [scenario], [economy], [dividends],
// [run]. Numbers may be written as decimals or ratios ("2/3").

#include "olg/closedform.hpp"
#include "olg/primitives.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace olg {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DividendSource { zero, geometric, explicit_sequence, constructed };
enum class PrecisionMode { fixed_double, fixed_digits, automatic };

struct TechnologyConfig {
    TechnologyKind kind = TechnologyKind::cobb_douglas;
    double A = 1;
    bool A_normalized = false;  // A = G / (beta (1 - alpha)), putting the bubbleless steady state at k = 1
    double alpha = 1.0 / 3;
    double delta = 1;
    double theta = 0;
};

struct SavingsConfig {
    SavingsKind kind = SavingsKind::log;
    double beta = 0.5;
    double gamma = 1;  // separable CRRA: u'(c) = (1 - beta) c^-gamma, v'(c) = beta c^-gamma
};

struct DividendConfig {
    DividendSource source = DividendSource::zero;
    double d0 = 0;
    double gamma = 0;
    std::vector<double> values;
    DividendTail tail = DividendTail::zero;
    double tail_ratio = 0;
    std::optional<double> declared_Gd;
    // constructed
    XFamily family = XFamily::geometric_unbounded;
    double C = 1;
    bool C_one_plus_rho = false;
    double sigma = 1;
    bool sigma_is_rho = false;
    bool theta_variant = false;
    std::optional<double> theta;  // absent with theta_variant: search the grid
};

struct PrecisionConfig {
    PrecisionMode mode = PrecisionMode::fixed_double;
    unsigned digits = 0;
};

struct RunConfig {
    std::optional<std::string> command;
    std::optional<double> p0;
    bool p0_constructed = false;
    std::optional<std::array<double, 3>> p0_range;  // lo, hi, count
    std::size_t horizon = 200;
    double tol = 1e-8;
    PrecisionConfig precision;
    bool sensitivity = true;
    std::optional<double> classify_tol;
    double k_floor = 1e-6;
    std::optional<double> R_ceiling;
};

struct Scenario {
    std::string name;
    double G = 1;
    TechnologyConfig tech;
    SavingsConfig savings;
    double k0 = 1;
    DividendConfig dividends;
    RunConfig run;

    double A() const {
        return tech.A_normalized ? G / (savings.beta * (1 - tech.alpha)) : tech.A;
    }
};

/// Parses "1.5", "-2e-3" or "a/b". Throws ConfigError on anything else.
double parse_number(const std::string& text, const std::string& where);

Scenario parse_scenario(std::istream& is, const std::string& source = "<config>");
Scenario load_scenario(const std::filesystem::path& path);

/// Built-in scenarios; their text matches configs/<name>.ini.
const std::vector<std::string>& preset_names();
const std::string& preset_text(const std::string& name);
Scenario preset_scenario(const std::string& name);

// ---------------------------------------------------------------------------
// Building model objects from a scenario

/// The closed-form spec described by a constructed-dividend scenario.
template <RealNumber Real>
XSequenceSpec<Real> make_spec(const Scenario& sc) {
    XSequenceSpec<Real> s;
    s.family = sc.dividends.family;
    s.alpha = Real(sc.tech.alpha);
    s.beta = Real(sc.savings.beta);
    s.G = Real(sc.G);
    s.A = sc.tech.A_normalized ? Real(s.G / (s.beta * (1 - s.alpha))) : Real(sc.tech.A);
    s.C = sc.dividends.C_one_plus_rho ? Real(1 + s.rho()) : Real(sc.dividends.C);
    s.sigma = sc.dividends.sigma_is_rho ? s.rho() : Real(sc.dividends.sigma);
    s.sigma_is_rho = sc.dividends.sigma_is_rho;
    return s;
}

inline ThetaOptions theta_options(const Scenario& sc) {
    ThetaOptions o;
    o.theta = sc.dividends.theta;
    return o;
}

/// Constructed path, theta path and the p0 they imply, in scalar type Real.
template <RealNumber Real>
struct Construction {
    ConstructedPath<Real> base;
    std::optional<ThetaPath<Real>> theta;
    Real p0 = 0;
};

/// Builds the closed-form path over `horizon` periods. Double results are
/// computed in multiprecision and rounded, since forming p_t and d_t
/// involves cancellation.
template <RealNumber Real>
Construction<Real> build_construction(const Scenario& sc, std::size_t horizon) {
    if (sc.dividends.source != DividendSource::constructed) {
        throw ConfigError("[dividends] kind must be 'constructed' for a closed-form path");
    }
    Construction<Real> out;
    if constexpr (std::is_same_v<Real, double>) {
        const auto spec = make_spec<double>(sc);
        out.base = construct_auto(spec, sc.k0, horizon);
        if (sc.dividends.theta_variant) {
            ScopedDigits guard(construction_digits(spec, horizon));
            const auto mp_base = construct(spec.cast<mp_real>(), mp_real(sc.k0), horizon);
            const auto th = construct_theta(mp_base, theta_options(sc));
            ThetaPath<double> t;
            t.theta = to_double(th.theta);
            t.tech = Technology<double>::cd_plus_log(to_double(th.tech.A()), to_double(th.tech.alpha()), t.theta);
            t.beta = to_double(th.beta);
            t.G = to_double(th.G);
            t.horizon = th.horizon;
            for (const auto& v : th.k) t.k.push_back(to_double(v));
            for (const auto& v : th.p) t.p.push_back(to_double(v));
            for (const auto& v : th.d) t.d.push_back(to_double(v));
            t.t0 = th.t0;
            t.k_star = to_double(th.k_star);
            t.R_star = to_double(th.R_star);
            if (th.declared_Gd) t.declared_Gd = to_double(*th.declared_Gd);
            t.probed = th.probed;
            out.theta = std::move(t);
        }
    } else {
        out.base = construct(make_spec<Real>(sc), Real(sc.k0), horizon);
        if (sc.dividends.theta_variant) out.theta = construct_theta(out.base, theta_options(sc));
    }
    out.p0 = out.theta ? shifted_price(*out.theta) : out.base.p[0];
    return out;
}

template <RealNumber Real>
Technology<Real> make_technology(const Scenario& sc) {
    const Real A = Real(sc.A());
    if (sc.tech.kind == TechnologyKind::cobb_douglas) {
        return Technology<Real>::cobb_douglas(A, Real(sc.tech.alpha), Real(sc.tech.delta));
    }
    return Technology<Real>::cd_plus_log(A, Real(sc.tech.alpha), Real(sc.tech.theta));
}

template <RealNumber Real>
SavingsRule<Real> make_savings(const Scenario& sc) {
    if (sc.savings.kind == SavingsKind::log) return SavingsRule<Real>::log_utility(Real(sc.savings.beta));
    const Real beta = Real(sc.savings.beta);
    const Real gamma = Real(sc.savings.gamma);
    return SavingsRule<Real>::separable([=](const Real& c) { using std::pow; return (1 - beta) * pow(c, -gamma); },
                                        [=](const Real& c) { using std::pow; return beta * pow(c, -gamma); });
}

/// The economy a scenario describes. Constructed dividends are built over
/// `dividend_horizon` periods; `construction` receives the closed-form path.
template <RealNumber Real>
Economy<Real> build_economy(const Scenario& sc, std::size_t dividend_horizon,
                            std::optional<Construction<Real>>* construction = nullptr) {
    const auto& dc = sc.dividends;
    if (dc.source == DividendSource::constructed) {
        auto built = build_construction<Real>(sc, dividend_horizon);
        Economy<Real> econ = built.theta ? shifted_economy(*built.theta) : economy_for(built.base);
        if (construction) *construction = std::move(built);
        return econ;
    }
    DividendStream<Real> stream = DividendStream<Real>::zero();
    switch (dc.source) {
        case DividendSource::zero: break;
        case DividendSource::geometric: stream = DividendStream<Real>::geometric(Real(dc.d0), Real(dc.gamma)); break;
        case DividendSource::explicit_sequence: {
            std::vector<Real> v(dc.values.begin(), dc.values.end());
            stream = DividendStream<Real>::explicit_sequence(std::move(v), dc.tail, Real(dc.tail_ratio));
            break;
        }
        case DividendSource::constructed: break;
    }
    if (dc.declared_Gd && dc.source != DividendSource::geometric) stream.declare_growth(Real(*dc.declared_Gd));
    return Economy<Real>(Real(sc.G), make_technology<Real>(sc), make_savings<Real>(sc), std::move(stream),
                         Real(sc.k0));
}

}  // namespace olg
