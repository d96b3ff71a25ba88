#pragma once

// Exact equilibrium paths for log utility and Cobb-Douglas production with
// full depreciation, built from an auxiliary sequence x_t through
//
//     k_{t+1} = A alpha k_t^alpha / (G x_t)
//     p_t     = (A alpha / rho) k_t^alpha - G k_{t+1}
//     d_{t+1} = (A alpha / G) k_{t+1}^{alpha-1} p_t - p_{t+1}
//
// with rho = alpha / (beta (1 - alpha)). Any x_t with x_t > rho and
// x_t + rho / x_{t+1} >= 1 + rho yields an equilibrium of the economy whose
// dividends are the constructed d_t. These paths are the reference the
// generic simulator is checked against.

#include "olg/dynamics.hpp"
#include "olg/numeric.hpp"
#include "olg/primitives.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace olg {

enum class XFamily { geometric_unbounded, one_plus_geometric, rho_plus_geometric };

inline const char* to_string(XFamily f) {
    switch (f) {
        case XFamily::geometric_unbounded: return "geometric_unbounded";
        case XFamily::one_plus_geometric: return "one_plus_geometric";
        case XFamily::rho_plus_geometric: return "rho_plus_geometric";
    }
    return "unknown";
}

/// x_t families:
///   geometric_unbounded:  x_t = C sigma^t         (k_t -> 0)
///   one_plus_geometric:   x_t = 1 + C sigma^t     (k_t -> golden-rule capital)
///   rho_plus_geometric:   x_t = rho + C sigma^t   (k_t -> bubbleless steady state)
template <RealNumber Real = double>
struct XSequenceSpec {
    XFamily family = XFamily::geometric_unbounded;
    Real C = 1;
    Real sigma = 1;
    Real A = 1;
    Real alpha = Real(1) / 3;
    Real beta = Real(1) / 2;
    Real G = 1;
    /// sigma = rho, recomputed at whatever precision the spec is used in.
    bool sigma_is_rho = false;

    Real rho() const { return alpha / (beta * (1 - alpha)); }
    Real ratio() const { return sigma_is_rho ? rho() : sigma; }

    /// C sigma^t
    Real geometric_part(std::size_t t) const {
        using std::pow;
        return C * pow(ratio(), Real(t));
    }

    Real x(std::size_t t) const {
        switch (family) {
            case XFamily::geometric_unbounded: return geometric_part(t);
            case XFamily::one_plus_geometric: return 1 + geometric_part(t);
            case XFamily::rho_plus_geometric: return rho() + geometric_part(t);
        }
        return Real(0);
    }

    /// x_t - rho, arranged so that no cancellation occurs.
    Real excess(std::size_t t) const {
        switch (family) {
            case XFamily::geometric_unbounded: return geometric_part(t) - rho();
            case XFamily::one_plus_geometric: return (1 - rho()) + geometric_part(t);
            case XFamily::rho_plus_geometric: return geometric_part(t);
        }
        return Real(0);
    }

    /// x_t + rho / x_{t+1} - 1 - rho, arranged so that no cancellation occurs.
    Real gap(std::size_t t) const {
        const Real r = rho();
        const Real c_t = geometric_part(t);
        const Real c_next = geometric_part(t + 1);
        switch (family) {
            case XFamily::geometric_unbounded: return (c_t - 1 - r) + r / c_next;
            case XFamily::one_plus_geometric: return c_t * (1 - r * ratio() / (1 + c_next));
            case XFamily::rho_plus_geometric: return c_t * ((r - ratio()) + c_next) / (r + c_next);
        }
        return Real(0);
    }

    /// Long-run growth rate of undetrended dividends when it is known in
    /// closed form.
    std::optional<Real> declared_growth() const {
        using std::pow;
        switch (family) {
            case XFamily::geometric_unbounded: return G * pow(ratio(), (1 - 2 * alpha) / (1 - alpha));
            case XFamily::one_plus_geometric: return G * ratio();
            case XFamily::rho_plus_geometric: return std::nullopt;
        }
        return std::nullopt;
    }

    void validate() const {
        if (!(A > 0)) throw std::invalid_argument("x-sequence: A must be positive");
        if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("x-sequence: alpha must lie in (0,1)");
        if (!(beta > 0 && beta < 1)) throw std::invalid_argument("x-sequence: beta must lie in (0,1)");
        if (!(G > 0)) throw std::invalid_argument("x-sequence: G must be positive");
        if (!(ratio() > 0)) throw std::invalid_argument("x-sequence: sigma must be positive");
    }

    template <RealNumber Other>
    XSequenceSpec<Other> cast() const {
        return XSequenceSpec<Other>{family,
                                    Other(to_double(C)),
                                    Other(to_double(sigma)),
                                    Other(to_double(A)),
                                    Other(to_double(alpha)),
                                    Other(to_double(beta)),
                                    Other(to_double(G)),
                                    sigma_is_rho};
    }
};

/// Figure presets: G = 1 and A = 1 / (beta (1 - alpha)), so the bubbleless
/// steady state is k = 1. Parameters are built from exact ratios in Real.
template <RealNumber Real = double>
XSequenceSpec<Real> fig1_spec() {
    XSequenceSpec<Real> s;
    s.family = XFamily::geometric_unbounded;
    s.alpha = Real(2) / 3;
    s.beta = Real(1) / 2;
    s.G = 1;
    s.A = 1 / (s.beta * (1 - s.alpha));
    s.C = 1 + s.rho();
    s.sigma = Real(11) / 10;
    return s;
}

template <RealNumber Real = double>
XSequenceSpec<Real> fig2_spec() {
    XSequenceSpec<Real> s;
    s.family = XFamily::one_plus_geometric;
    s.alpha = Real(1) / 3;
    s.beta = Real(2) / 3;
    s.G = 1;
    s.A = 1 / (s.beta * (1 - s.alpha));
    s.C = 1;
    s.sigma = Real(9) / 10;
    return s;
}

template <RealNumber Real = double>
XSequenceSpec<Real> fig3_spec() {
    XSequenceSpec<Real> s;
    s.family = XFamily::rho_plus_geometric;
    s.alpha = Real(1) / 3;
    s.beta = Real(2) / 3;
    s.G = 1;
    s.A = 1 / (s.beta * (1 - s.alpha));
    s.C = 1;
    s.sigma = s.rho();
    s.sigma_is_rho = true;
    return s;
}

/// Raised when the x-sequence violates x_t > rho or
/// x_t + rho / x_{t+1} >= 1 + rho.
class ConstructionError : public std::runtime_error {
public:
    ConstructionError(std::size_t index, std::string condition, const std::string& what)
        : std::runtime_error(what), index_(index), condition_(std::move(condition)) {}

    std::size_t index() const { return index_; }
    const std::string& condition() const { return condition_; }

private:
    std::size_t index_;
    std::string condition_;
};

struct XViolation {
    std::size_t index;
    std::string condition;  // "x_t > rho" or "x_t + rho/x_{t+1} >= 1 + rho"
    double value;           // offending excess or gap
};

/// Scans t = 0..T for the first violation of the x-sequence conditions.
template <RealNumber Real>
std::optional<XViolation> check_x_sequence(const XSequenceSpec<Real>& spec, std::size_t T) {
    for (std::size_t t = 0; t <= T; ++t) {
        const Real e = spec.excess(t);
        if (!(e > 0)) return XViolation{t, "x_t > rho", to_double(e)};
        const Real g = spec.gap(t);
        if (g < 0) return XViolation{t, "x_t + rho/x_{t+1} >= 1 + rho", to_double(g)};
    }
    return std::nullopt;
}

struct FamilyCondition {
    bool holds;
    std::string statement;
};

/// Parameter restrictions under which each family satisfies both x-sequence
/// conditions for every t.
template <RealNumber Real>
FamilyCondition family_condition(const XSequenceSpec<Real>& spec) {
    const Real r = spec.rho();
    switch (spec.family) {
        case XFamily::geometric_unbounded:
            return {spec.C >= 1 + r && spec.ratio() > 1, "C >= 1 + rho and sigma > 1"};
        case XFamily::one_plus_geometric:
            return {spec.C > 0 && r > 0 && r < 1 && spec.ratio() > 0 && spec.ratio() < 1,
                    "C > 0 and rho, sigma in (0,1)"};
        case XFamily::rho_plus_geometric:
            return {spec.C > 0 && spec.ratio() > 0 && spec.ratio() <= r, "C > 0 and 0 < sigma <= rho"};
    }
    return {false, ""};
}

/// Cross-checks of the recursion against the closed forms, as maximum
/// relative discrepancies over the horizon.
struct ConstructionChecks {
    double capital_closed_form = 0;  // k_{t+1} via weighted log-sum of x_s
    double dividend_closed_form = 0; // d_{t+1} = (A alpha / rho) k_{t+1}^alpha gap_t
    double ratio_closed_form = 0;    // d_t / p_t = gap_{t-1} x_t / (x_t - rho)
    double min_price = 0;
    double min_dividend = 0;
};

template <RealNumber Real = double>
struct ConstructedPath {
    XSequenceSpec<Real> spec;
    std::size_t horizon = 0;
    std::vector<Real> x;  // x_0 .. x_T
    std::vector<Real> k;  // k_0 .. k_{T+1}
    std::vector<Real> p;  // p_0 .. p_T
    std::vector<Real> d;  // d_0 .. d_T, d_0 = 0 (the construction starts at d_1)
    ConstructionChecks checks;
    unsigned digits = 0;  // working precision used

    Real rho() const { return spec.rho(); }
};

/// Builds the path for t = 0..T from k_0.
template <RealNumber Real>
ConstructedPath<Real> construct(const XSequenceSpec<Real>& spec, const Real& k0, std::size_t T) {
    using std::log;
    using std::pow;
    spec.validate();
    if (!(k0 > 0)) throw std::invalid_argument("construct: k0 must be positive");
    if (T < 1) throw std::invalid_argument("construct: horizon must be at least 1");
    if (auto v = check_x_sequence(spec, T)) {
        throw ConstructionError(v->index, v->condition,
                                "x-sequence violates " + v->condition + " at t = " + std::to_string(v->index));
    }

    ConstructedPath<Real> path;
    path.spec = spec;
    path.horizon = T;
    path.digits = working_digits<Real>();
    const Real Aa = spec.A * spec.alpha;
    const Real rho = spec.rho();

    path.x.resize(T + 1);
    path.k.resize(T + 2);
    path.p.resize(T + 1);
    path.d.assign(T + 1, Real(0));
    std::vector<Real> ka(T + 2);  // k_t^alpha

    path.k[0] = k0;
    ka[0] = pow(k0, spec.alpha);
    for (std::size_t t = 0; t <= T; ++t) {
        path.x[t] = spec.x(t);
        path.k[t + 1] = Aa * ka[t] / (spec.G * path.x[t]);
        ka[t + 1] = pow(path.k[t + 1], spec.alpha);
        path.p[t] = Aa / rho * ka[t] - spec.G * path.k[t + 1];
    }
    for (std::size_t t = 0; t < T; ++t) {
        path.d[t + 1] = Aa / spec.G * (ka[t + 1] / path.k[t + 1]) * path.p[t] - path.p[t + 1];
    }

    // Closed-form cross-checks.
    auto& c = path.checks;
    c.min_price = to_double(path.p[0]);
    c.min_dividend = T >= 1 ? to_double(path.d[1]) : 0.0;
    const double alpha = to_double(spec.alpha);
    const double log_base = std::log(to_double(Real(Aa / spec.G)));
    const double log_k0 = to_double(Real(log(k0)));
    std::vector<double> log_x(T + 1);
    for (std::size_t s = 0; s <= T; ++s) log_x[s] = to_double(Real(log(path.x[s])));
    std::vector<double> alpha_pow(T + 2, 1.0);
    for (std::size_t j = 1; j < alpha_pow.size(); ++j) alpha_pow[j] = alpha_pow[j - 1] * alpha;

    for (std::size_t t = 0; t <= T; ++t) {
        // log k_{t+1} = (1 - a^{t+1})/(1 - a) log(A a / G) + a^{t+1} log k_0 - sum_s a^{t-s} log x_s
        double weighted = 0;
        for (std::size_t s = 0; s <= t; ++s) weighted += alpha_pow[t - s] * log_x[s];
        const double log_closed =
            (1 - alpha_pow[t + 1]) / (1 - alpha) * log_base + alpha_pow[t + 1] * log_k0 - weighted;
        const double log_rec = to_double(Real(log(path.k[t + 1])));
        c.capital_closed_form = std::max(c.capital_closed_form, std::abs(std::expm1(log_rec - log_closed)));
        c.min_price = std::min(c.min_price, to_double(path.p[t]));
    }
    for (std::size_t t = 0; t < T; ++t) {
        const Real d_closed = Aa / rho * ka[t + 1] * spec.gap(t);
        c.dividend_closed_form = std::max(c.dividend_closed_form, rel_diff(d_closed, path.d[t + 1]));
        const Real ratio_closed = spec.gap(t) * path.x[t + 1] / spec.excess(t + 1);
        const Real ratio = path.d[t + 1] / path.p[t + 1];
        c.ratio_closed_form = std::max(c.ratio_closed_form, rel_diff(ratio_closed, ratio));
        c.min_dividend = std::min(c.min_dividend, to_double(path.d[t + 1]));
    }
    return path;
}

/// Exponents of C and sigma in d_t for x_t = C sigma^t:
///   mu_t = 1 - alpha (1 - alpha^t) / (1 - alpha)
///   nu_t = (1 - 2 alpha)/(1 - alpha) (t - 1) + (alpha / (1 - alpha))^2 (1 - alpha^{t-1})
inline std::pair<double, double> exponents(double alpha, std::size_t t) {
    if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("exponents: alpha must lie in (0,1)");
    if (t < 1) throw std::invalid_argument("exponents: t must be at least 1");
    const double td = static_cast<double>(t);
    const double mu = 1 - alpha * (1 - std::pow(alpha, td)) / (1 - alpha);
    const double ratio = alpha / (1 - alpha);
    const double nu = (1 - 2 * alpha) / (1 - alpha) * (td - 1) + ratio * ratio * (1 - std::pow(alpha, td - 1));
    return {mu, nu};
}

// ---------------------------------------------------------------------------
// Economy wrappers and exact replay

/// The economy whose equilibrium the constructed path is: log utility,
/// Cobb-Douglas with full depreciation, constructed dividends.
template <RealNumber Real>
Economy<Real> economy_for(const ConstructedPath<Real>& path) {
    const auto& s = path.spec;
    return Economy<Real>(s.G, Technology<Real>::cobb_douglas(s.A, s.alpha, Real(1)),
                         SavingsRule<Real>::log_utility(s.beta),
                         DividendStream<Real>::constructed(path.d, s.declared_growth()), path.k[0]);
}

/// Trajectory view of a constructed path (R, w, q, v, b filled in).
template <RealNumber Real>
Trajectory<Real> to_trajectory(const Economy<Real>& econ, const std::vector<Real>& k, const std::vector<Real>& p,
                               const std::vector<Real>& d, std::size_t T) {
    Trajectory<Real> traj;
    traj.horizon = T;
    traj.periods.reserve(T + 1);
    for (std::size_t t = 0; t <= T; ++t) {
        const auto pt = econ.tech.eval(k[t]);
        Period<Real> per;
        per.t = t;
        per.k = k[t];
        per.p = p[t];
        per.R = pt.fprime;
        per.w = pt.wage;
        per.d = d[t];
        traj.periods.push_back(per);
    }
    fill_valuation(traj, econ.G);
    traj.tail.certified = false;
    return traj;
}

template <RealNumber Real>
Trajectory<Real> to_trajectory(const ConstructedPath<Real>& path) {
    return to_trajectory(economy_for(path), path.k, path.p, path.d, path.horizon);
}

struct ReplayReport {
    SimStatus status = SimStatus::completed;
    std::size_t fail_t = 0;
    std::size_t horizon = 0;
    double max_rel_k = 0;
    double max_rel_p = 0;
    unsigned digits = 0;
};

/// Simulates `econ` from p0 and compares k_t, p_t with the reference
/// sequences for t = 0..T.
template <RealNumber Real>
ReplayReport replay(const Economy<Real>& econ, const Real& p0, const std::vector<Real>& k_ref,
                    const std::vector<Real>& p_ref, std::size_t T) {
    const auto traj = simulate(econ, p0, T);
    ReplayReport rep;
    rep.status = traj.status;
    rep.fail_t = traj.fail_t;
    rep.horizon = T;
    rep.digits = working_digits<Real>();
    for (const auto& per : traj.periods) {
        rep.max_rel_k = std::max(rep.max_rel_k, rel_diff(per.k, k_ref[per.t]));
        rep.max_rel_p = std::max(rep.max_rel_p, rel_diff(per.p, p_ref[per.t]));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Modified technology f_theta(k) = A k^alpha + theta k log(1 + 1/k)

template <RealNumber Real = double>
struct ThetaPath {
    Real theta = 0;
    Technology<Real> tech = Technology<Real>::cd_plus_log(Real(1), Real(0.5), Real(0));
    Real beta = 0;
    Real G = 1;
    std::size_t horizon = 0;
    std::vector<Real> k;  // k_0 .. k_{T+1}, shared with the base path
    std::vector<Real> p;  // p^theta_0 .. p^theta_T
    std::vector<Real> d;  // d^theta_0 .. d^theta_T, d^theta_0 = 0
    std::size_t t0 = 0;   // d^theta_t > 0 for all t0 <= t <= T
    Real k_star = 0;      // positive steady state of g_theta(., 0)
    Real R_star = 0;      // f_theta'(k_star)
    std::optional<Real> declared_Gd;
    std::vector<std::pair<double, double>> probed;  // (theta, f_theta'(k*_theta))
};

/// Steady state of g_theta(., 0): G = beta (A (1 - alpha) k^{alpha-1} + theta / (1 + k)).
template <RealNumber Real>
Real theta_steady_state(const Real& A, const Real& alpha, const Real& beta, const Real& G, const Real& theta) {
    using std::pow;
    auto phi = [&](const Real& k) { return beta * (A * (1 - alpha) * pow(k, alpha - 1) + theta / (1 + k)) - G; };
    Real lo = 1, hi = 1;
    while (phi(lo) <= 0) lo /= 16;
    while (phi(hi) >= 0) hi *= 16;
    const auto b = bisect_sign_change(phi, lo, hi, /*positive_side_high=*/false);
    return b.mid();
}

struct ThetaOptions {
    std::optional<double> theta;        // fixed theta; probe the grid 1, 2, 4, ..., 2^20 when absent
    std::size_t t0 = 0;                 // earliest admissible start
    std::optional<double> target_rate;  // required bound on f_theta'(k*); default G_d of the base path, else G
};

class ThetaSearchError : public std::runtime_error {
public:
    ThetaSearchError(const std::string& what, std::vector<std::pair<double, double>> probed)
        : std::runtime_error(what), probed_(std::move(probed)) {}
    const std::vector<std::pair<double, double>>& probed() const { return probed_; }

private:
    std::vector<std::pair<double, double>> probed_;
};

template <RealNumber Real>
ThetaPath<Real> construct_theta(const ConstructedPath<Real>& base, const ThetaOptions& opt = {}) {
    const auto& s = base.spec;
    if (s.family != XFamily::geometric_unbounded) {
        throw std::invalid_argument("construct_theta: base path must come from the geometric_unbounded family");
    }
    if (!(s.alpha > Real(1) / 2)) throw std::invalid_argument("construct_theta: requires alpha > 1/2");

    ThetaPath<Real> out;
    out.beta = s.beta;
    out.G = s.G;
    out.horizon = base.horizon;
    out.declared_Gd = s.declared_growth();

    const double target = opt.target_rate ? *opt.target_rate
                                          : (out.declared_Gd ? to_double(*out.declared_Gd) : to_double(s.G));
    // Selecting theta and locating k*_theta needs no more than double
    // precision, whatever Real the path is built in.
    const double A = to_double(s.A), alpha = to_double(s.alpha), beta = to_double(s.beta), G = to_double(s.G);
    auto rate_at = [&](double theta, double& k_star) {
        k_star = theta_steady_state(A, alpha, beta, G, theta);
        return Technology<double>::cd_plus_log(A, alpha, theta).fprime(k_star);
    };

    double theta = 0, k_star = 0, R_star = 0;
    if (opt.theta) {
        if (!(*opt.theta >= 0)) throw std::invalid_argument("construct_theta: theta must be nonnegative");
        theta = *opt.theta;
        R_star = rate_at(theta, k_star);
        out.probed.emplace_back(theta, R_star);
    } else {
        bool found = false;
        for (int j = 0; j <= 20 && !found; ++j) {
            const double candidate = std::ldexp(1.0, j);
            double k = 0;
            const double R = rate_at(candidate, k);
            out.probed.emplace_back(candidate, R);
            if (R < target) {
                theta = candidate;
                k_star = k;
                R_star = R;
                found = true;
            }
        }
        if (!found) {
            throw ThetaSearchError("construct_theta: no theta in {1, 2, ..., 2^20} brings f_theta'(k*) below " +
                                       std::to_string(target),
                                   out.probed);
        }
    }
    out.theta = Real(theta);
    out.k_star = Real(k_star);
    out.R_star = Real(R_star);
    out.tech = Technology<Real>::cd_plus_log(s.A, s.alpha, out.theta);

    const std::size_t T = base.horizon;
    out.k = base.k;
    out.p.resize(T + 1);
    out.d.assign(T + 1, Real(0));
    for (std::size_t t = 0; t <= T; ++t) {
        out.p[t] = base.p[t] + s.beta * out.theta * out.k[t] / (1 + out.k[t]);
    }
    for (std::size_t t = 1; t <= T; ++t) {
        out.d[t] = out.tech.fprime(out.k[t]) / s.G * out.p[t - 1] - out.p[t];
    }

    // First index from which d^theta stays positive through the horizon.
    std::size_t t0 = T + 1;
    for (std::size_t t = T; t >= 1; --t) {
        if (!(out.d[t] > 0)) break;
        t0 = t;
    }
    t0 = std::max(t0, std::max<std::size_t>(opt.t0, 1));
    if (t0 > T) throw std::runtime_error("construct_theta: dividends are not eventually positive within the horizon");
    out.t0 = t0;
    return out;
}

/// Economy that starts at t0: technology f_theta, capital k_{t0}, dividends
/// d^theta_{t0 + s}. Its equilibrium price at date 0 is p^theta_{t0}.
template <RealNumber Real>
Economy<Real> shifted_economy(const ThetaPath<Real>& path) {
    std::vector<Real> d(path.d.begin() + static_cast<std::ptrdiff_t>(path.t0), path.d.end());
    d[0] = 0;
    return Economy<Real>(path.G, path.tech, SavingsRule<Real>::log_utility(path.beta),
                         DividendStream<Real>::constructed(std::move(d), path.declared_Gd), path.k[path.t0]);
}

template <RealNumber Real>
Real shifted_price(const ThetaPath<Real>& path) {
    return path.p[path.t0];
}

// ---------------------------------------------------------------------------
// Precision selection

/// Decimal digits lost to cancellation when forming p_t and d_{t+1} in the
/// construction: p_t carries a factor x_t / (x_t - rho) and d_{t+1} a factor
/// (x_t + rho/x_{t+1} + 1 + rho) / gap_t relative to the terms subtracted.
inline unsigned construction_digits(const XSequenceSpec<double>& spec, std::size_t T) {
    double lost = 0;
    const double rho = spec.rho();
    for (std::size_t t = 0; t <= T; ++t) {
        const double x = spec.x(t), e = spec.excess(t), g = spec.gap(t);
        double need = 0;
        if (e > 0) need += std::max(0.0, std::log10(x / e));
        if (g > 0) need += std::max(0.0, std::log10((x + rho / spec.x(t + 1) + 1 + rho) / g));
        lost = std::max(lost, need);
    }
    return 25 + static_cast<unsigned>(std::ceil(lost));
}

/// Builds the path in multiprecision at a working precision that absorbs the
/// cancellation, then rounds every sequence to double.
inline ConstructedPath<double> construct_auto(const XSequenceSpec<double>& spec, double k0, std::size_t T) {
    if (auto v = check_x_sequence(spec, T)) {
        throw ConstructionError(v->index, v->condition,
                                "x-sequence violates " + v->condition + " at t = " + std::to_string(v->index));
    }
    const unsigned digits = construction_digits(spec, T);
    ScopedDigits guard(digits);
    const auto mp = construct(spec.cast<mp_real>(), mp_real(k0), T);
    ConstructedPath<double> out;
    out.spec = spec;
    out.horizon = T;
    out.checks = mp.checks;
    out.digits = digits;
    auto round = [](const std::vector<mp_real>& v) {
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) r[i] = to_double(v[i]);
        return r;
    };
    out.x = round(mp.x);
    out.k = round(mp.k);
    out.p = round(mp.p);
    out.d = round(mp.d);
    return out;
}

/// Starting precision for replaying a path through the simulator. An error
/// in p_t grows by R_{t+1} / G per period; the coupled (k, p) system loses
/// close to twice the decimal logarithm of that product, so the estimate is
/// twice its running peak plus guard digits.
template <RealNumber Real>
unsigned replay_digits(const Technology<Real>& tech, const Real& G, const std::vector<Real>& k, std::size_t T) {
    double cum = 0, peak = 0;
    for (std::size_t t = 1; t <= T && t < k.size(); ++t) {
        cum += std::log10(to_double(Real(tech.fprime(k[t]) / G)));
        peak = std::max(peak, cum);
    }
    return 25 + static_cast<unsigned>(std::ceil(2 * peak));
}

/// Outcome of an adaptive-precision run.
struct PrecisionSearch {
    unsigned digits = 0;
    bool resolved = false;  // an accepted run was found below the cap
    std::vector<std::pair<unsigned, std::size_t>> attempts;  // (digits, periods completed)
};

inline constexpr unsigned kMinDigits = 32;
inline constexpr unsigned kMaxDigits = 16384;

/// Reference discrepancy below which a replay is accepted. A replay that
/// only just completes carries an error of the size of the state near the
/// horizon; requiring this margin stands in for extra guard digits.
inline constexpr double kReplayAcceptance = 1e-20;

/// Doubles the working precision until `run(digits)` is accepted. `run`
/// returns {periods completed, accepted}. The search stops early when two
/// successive precisions fail at the same period, which marks a failure of
/// the model rather than of the arithmetic.
template <class Run>
PrecisionSearch choose_digits(Run&& run, unsigned start = kMinDigits, unsigned cap = kMaxDigits) {
    PrecisionSearch out;
    std::optional<std::size_t> prev_fail;
    for (unsigned digits = start; digits <= cap; digits *= 2) {
        const auto [periods, accepted] = run(digits);
        out.attempts.emplace_back(digits, periods);
        out.digits = digits;
        if (accepted) {
            out.resolved = true;
            return out;
        }
        if (prev_fail && *prev_fail == periods) return out;
        prev_fail = periods;
    }
    return out;
}

template <class Attempt>
ReplayReport adaptive_replay(Attempt&& attempt, std::size_t T, unsigned start) {
    ReplayReport last;
    choose_digits(
        [&](unsigned digits) {
            last = attempt(digits);
            const bool done = last.status == SimStatus::completed;
            const bool accepted = done && last.max_rel_k <= kReplayAcceptance && last.max_rel_p <= kReplayAcceptance;
            return std::pair<std::size_t, bool>{done ? T : last.fail_t, accepted};
        },
        start);
    return last;
}

/// First precision tried by oracle_replay.
inline unsigned oracle_start_digits(const XSequenceSpec<double>& spec, double k0, std::size_t T) {
    const auto path = construct_auto(spec, k0, T);
    return std::max({kMinDigits, construction_digits(spec, T), replay_digits(economy_for(path).tech, spec.G, path.k, T)});
}

/// Constructs the path at increasing precision, replays it through the
/// generic simulator, and reports the discrepancy at the first precision at
/// which the replay completes T periods with margin.
inline ReplayReport oracle_replay(const XSequenceSpec<double>& spec_double, double k0, std::size_t T) {
    const unsigned floor_digits = oracle_start_digits(spec_double, k0, T);
    return adaptive_replay(
        [&](unsigned digits) {
            ScopedDigits guard(digits);
            const auto path = construct(spec_double.cast<mp_real>(), mp_real(k0), T);
            return replay(economy_for(path), path.p[0], path.k, path.p, T);
        },
        T, floor_digits);
}

/// As oracle_replay, for the theta economy started at its verified t0.
inline ReplayReport oracle_replay_theta(const XSequenceSpec<double>& base_spec, double k0, std::size_t base_T,
                                        const ThetaOptions& opt, std::size_t T) {
    const auto th = construct_theta(construct_auto(base_spec, k0, base_T), opt);
    const std::vector<double> k(th.k.begin() + static_cast<std::ptrdiff_t>(th.t0), th.k.end());
    const unsigned floor_digits = std::max(
        {kMinDigits, construction_digits(base_spec, base_T), replay_digits(th.tech, th.G, k, std::min(T, k.size() - 1))});
    return adaptive_replay(
        [&](unsigned digits) {
            ScopedDigits guard(digits);
            const auto base = construct(base_spec.cast<mp_real>(), mp_real(k0), base_T);
            const auto th = construct_theta(base, opt);
            if (th.t0 + T > base_T) throw std::invalid_argument("oracle_replay_theta: base horizon too short");
            std::vector<mp_real> k(th.k.begin() + static_cast<std::ptrdiff_t>(th.t0), th.k.end());
            std::vector<mp_real> p(th.p.begin() + static_cast<std::ptrdiff_t>(th.t0), th.p.end());
            return replay(shifted_economy(th), shifted_price(th), k, p, T);
        },
        T, floor_digits);
}

}  // namespace olg
