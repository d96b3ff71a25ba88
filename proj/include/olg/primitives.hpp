#pragma once

// Production technologies, savings rules, dividend streams, and the implicit
// one-period capital transition x = g(k, p) solving
//
//     G x + p - s(w(k), f'(x)) = 0,      w(k) = f(k) - k f'(k).
//
// All quantities are detrended (divided by population G^t).

#include "olg/numeric.hpp"
#include "olg/roots.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace olg {

// ---------------------------------------------------------------------------
// Production

enum class TechnologyKind { cobb_douglas, cd_plus_log };

/// f(k) and f'(k) evaluated together (they share one power evaluation).
template <RealNumber Real>
struct ProductionPoint {
    Real f;
    Real fprime;
    Real wage;
};

/// Intensive production function f(k) = F(k, 1).
///
///   cobb_douglas: f(k) = A k^alpha + (1 - delta) k
///   cd_plus_log:  f(k) = A k^alpha + theta k log(1 + 1/k)
template <RealNumber Real = double>
class Technology {
public:
    static Technology cobb_douglas(Real A, Real alpha, Real delta) {
        if (!(A > 0)) throw std::invalid_argument("cobb_douglas: A must be positive");
        if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("cobb_douglas: alpha must lie in (0,1)");
        if (!(delta >= 0 && delta <= 1)) throw std::invalid_argument("cobb_douglas: delta must lie in [0,1]");
        Technology t;
        t.kind_ = TechnologyKind::cobb_douglas;
        t.A_ = A;
        t.alpha_ = alpha;
        t.delta_ = delta;
        return t;
    }

    static Technology cd_plus_log(Real A, Real alpha, Real theta) {
        if (!(A > 0)) throw std::invalid_argument("cd_plus_log: A must be positive");
        if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("cd_plus_log: alpha must lie in (0,1)");
        if (!(theta >= 0)) throw std::invalid_argument("cd_plus_log: theta must be nonnegative");
        Technology t;
        t.kind_ = TechnologyKind::cd_plus_log;
        t.A_ = A;
        t.alpha_ = alpha;
        t.theta_ = theta;
        return t;
    }

    TechnologyKind kind() const { return kind_; }
    const Real& A() const { return A_; }
    const Real& alpha() const { return alpha_; }
    const Real& delta() const { return delta_; }
    const Real& theta() const { return theta_; }

    ProductionPoint<Real> eval(const Real& k) const {
        using std::log1p;
        using std::pow;
        const Real ka = pow(k, alpha_);
        ProductionPoint<Real> out;
        if (kind_ == TechnologyKind::cobb_douglas) {
            out.f = A_ * ka + (1 - delta_) * k;
            out.fprime = A_ * alpha_ * ka / k + (1 - delta_);
            out.wage = A_ * (1 - alpha_) * ka;
        } else {
            const Real l = log1p(1 / k);
            out.f = A_ * ka + theta_ * k * l;
            out.fprime = A_ * alpha_ * ka / k + theta_ * (l - 1 / (1 + k));
            out.wage = A_ * (1 - alpha_) * ka + theta_ * k / (1 + k);
        }
        return out;
    }

    Real f(const Real& k) const { return eval(k).f; }
    Real fprime(const Real& k) const { return eval(k).fprime; }

    /// lim_{k -> inf} f'(k).
    Real fprime_at_infinity() const {
        return kind_ == TechnologyKind::cobb_douglas ? Real(1 - delta_) : Real(0);
    }

    /// f'(k) at the probe floor; stands in for f'(0+) = +inf.
    Real fprime_near_zero() const { return fprime(Real(kProbeFloor)); }

private:
    Technology() = default;

    TechnologyKind kind_ = TechnologyKind::cobb_douglas;
    Real A_ = 1;
    Real alpha_ = Real(1) / 3;
    Real delta_ = 1;
    Real theta_ = 0;
};

/// w(k) = f(k) - k f'(k).
template <RealNumber Real>
Real wage(const Technology<Real>& tech, const Real& k) {
    if (!(k > 0)) throw std::domain_error("wage: capital must be positive");
    return tech.eval(k).wage;
}

/// Unique k with f'(k) = R, for f'(inf) < R < f'(0+).
template <RealNumber Real>
Real invert_marginal_product(const Technology<Real>& tech, const Real& R) {
    if (!(R > tech.fprime_at_infinity()) || !(R < tech.fprime_near_zero())) {
        throw std::range_error("invert_marginal_product: R outside (f'(inf), f'(0+))");
    }
    // Expand a bracket geometrically from k = 1.
    Real lo = 1, hi = 1;
    while (tech.fprime(lo) <= R) lo /= 16;
    while (tech.fprime(hi) >= R) hi *= 16;
    auto gap = [&](const Real& k) { return tech.fprime(k) - R; };
    // f' - R is positive below the root.
    const auto b = bisect_sign_change(gap, lo, hi, /*positive_side_high=*/false);
    const Real a = gap(b.lo), c = gap(b.hi);
    using std::abs;
    return abs(a) <= abs(c) ? b.lo : b.hi;
}

// ---------------------------------------------------------------------------
// Savings

enum class SavingsKind { log, separable };

/// Optimal saving s(w, R) of a young agent.
///
///   log:       U = (1-beta) log c_y + beta log c_o, so s = beta w.
///   separable: U = u(c_y) + v(c_o) given through marginal utilities u', v'
///              (strictly decreasing, infinite at 0+).
template <RealNumber Real = double>
class SavingsRule {
public:
    using Marginal = std::function<Real(const Real&)>;

    static SavingsRule log_utility(Real beta) {
        if (!(beta > 0 && beta < 1)) throw std::invalid_argument("log savings: beta must lie in (0,1)");
        SavingsRule s;
        s.kind_ = SavingsKind::log;
        s.beta_ = beta;
        return s;
    }

    static SavingsRule separable(Marginal u_prime, Marginal v_prime) {
        if (!u_prime || !v_prime) throw std::invalid_argument("separable savings: marginal utilities required");
        SavingsRule s;
        s.kind_ = SavingsKind::separable;
        s.u_prime_ = std::move(u_prime);
        s.v_prime_ = std::move(v_prime);
        return s;
    }

    SavingsKind kind() const { return kind_; }
    const Real& beta() const { return beta_; }
    const Marginal& u_prime() const { return u_prime_; }
    const Marginal& v_prime() const { return v_prime_; }

    /// False when s(w, R) does not depend on R; the transition then has a
    /// direct solution.
    bool interest_elastic() const { return kind_ != SavingsKind::log; }

private:
    SavingsRule() = default;

    SavingsKind kind_ = SavingsKind::log;
    Real beta_ = Real(1) / 2;
    Marginal u_prime_;
    Marginal v_prime_;
};

template <RealNumber Real>
Real savings(const SavingsRule<Real>& rule, const Real& w, const Real& R) {
    if (!(w > 0) || !(R > 0)) throw std::domain_error("savings: w and R must be positive");
    if (rule.kind() == SavingsKind::log) return rule.beta() * w;

    // First-order condition -u'(w - s) + R v'(R s) = 0; decreasing in s, +inf
    // at s = 0+ and -inf at s = w-.
    auto foc = [&](const Real& s) { return -rule.u_prime()(w - s) + R * rule.v_prime()(R * s); };
    const auto b = bisect_sign_change(foc, Real(0), w, /*positive_side_high=*/false);
    return b.mid();
}

/// Samples c v'(c) on a log grid and reports whether it is nondecreasing,
/// the sufficient condition for s to be increasing in R.
template <RealNumber Real>
bool gross_substitutes_on_grid(const SavingsRule<Real>& rule, double c_min = 1e-6, double c_max = 1e6,
                               int n = 200) {
    if (rule.kind() == SavingsKind::log) return true;
    using std::exp;
    using std::log;
    Real prev = -1;
    for (int i = 0; i < n; ++i) {
        const double c = std::exp(std::log(c_min) + (std::log(c_max) - std::log(c_min)) * i / (n - 1));
        const Real val = Real(c) * rule.v_prime()(Real(c));
        if (i > 0 && val < prev * (1 - 1e-12)) return false;
        prev = val;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Dividends

enum class DividendKind { explicit_sequence, geometric, constructed };
enum class DividendTail { zero, geometric };

/// Detrended dividends d_t = D_t / G^t.
template <RealNumber Real = double>
class DividendStream {
public:
    static DividendStream zero() { return explicit_sequence({}, DividendTail::zero); }

    static DividendStream explicit_sequence(std::vector<Real> values, DividendTail tail = DividendTail::zero,
                                            Real tail_ratio = 0) {
        DividendStream d;
        d.kind_ = DividendKind::explicit_sequence;
        d.values_ = std::move(values);
        d.tail_ = tail;
        d.ratio_ = tail_ratio;
        d.validate();
        return d;
    }

    /// d_t = d0 gamma^t; the long-run level growth rate is gamma G.
    static DividendStream geometric(Real d0, Real gamma) {
        DividendStream d;
        d.kind_ = DividendKind::geometric;
        d.d0_ = d0;
        d.ratio_ = gamma;
        d.validate();
        return d;
    }

    /// Sequence produced by the closed-form constructions; entries beyond the
    /// supplied horizon are zero.
    static DividendStream constructed(std::vector<Real> values, std::optional<Real> declared_Gd = std::nullopt) {
        DividendStream d;
        d.kind_ = DividendKind::constructed;
        d.values_ = std::move(values);
        d.declared_Gd_ = std::move(declared_Gd);
        d.validate();
        return d;
    }

    DividendKind kind() const { return kind_; }
    DividendTail tail() const { return tail_; }
    const std::vector<Real>& values() const { return values_; }
    const Real& level() const { return d0_; }
    const Real& ratio() const { return ratio_; }

    DividendStream& declare_growth(Real Gd) {
        if (!(Gd >= 0)) throw std::invalid_argument("declared G_d must be nonnegative");
        declared_Gd_ = std::move(Gd);
        return *this;
    }

    /// Declared long-run growth rate of undetrended dividends, when known
    /// exactly. For the geometric variant this is gamma G.
    std::optional<Real> declared_growth(const Real& G) const {
        if (kind_ == DividendKind::geometric) return ratio_ * G;
        return declared_Gd_;
    }

    Real at(std::size_t t) const {
        using std::pow;
        if (kind_ == DividendKind::geometric) return d0_ * pow(ratio_, Real(t));
        if (t < values_.size()) return values_[t];
        if (kind_ == DividendKind::explicit_sequence && tail_ == DividendTail::geometric && !values_.empty()) {
            return values_.back() * pow(ratio_, Real(t - values_.size() + 1));
        }
        return Real(0);
    }

    /// True when d_t = 0 for every t <= horizon.
    bool zero_through(std::size_t horizon) const {
        if (kind_ == DividendKind::geometric) return d0_ == 0;
        for (std::size_t t = 0; t <= horizon && t < values_.size(); ++t) {
            if (values_[t] != 0) return false;
        }
        if (horizon >= values_.size() && kind_ == DividendKind::explicit_sequence &&
            tail_ == DividendTail::geometric && !values_.empty()) {
            return values_.back() == 0 || ratio_ == 0;
        }
        return true;
    }

private:
    DividendStream() = default;

    void validate() const {
        for (const auto& v : values_) {
            if (!(v >= 0)) throw std::invalid_argument("dividends must be nonnegative");
        }
        if (!(d0_ >= 0)) throw std::invalid_argument("dividend level must be nonnegative");
        if (!(ratio_ >= 0)) throw std::invalid_argument("dividend ratio must be nonnegative");
    }

    DividendKind kind_ = DividendKind::explicit_sequence;
    std::vector<Real> values_;
    DividendTail tail_ = DividendTail::zero;
    Real d0_ = 0;
    Real ratio_ = 0;
    std::optional<Real> declared_Gd_;
};

// ---------------------------------------------------------------------------
// Economy

template <RealNumber Real = double>
struct Economy {
    Real G;
    Technology<Real> tech;
    SavingsRule<Real> savings;
    DividendStream<Real> dividends;
    Real k0;

    Economy(Real growth, Technology<Real> technology, SavingsRule<Real> rule, DividendStream<Real> stream,
            Real initial_capital)
        : G(std::move(growth)),
          tech(std::move(technology)),
          savings(std::move(rule)),
          dividends(std::move(stream)),
          k0(std::move(initial_capital)) {
        if (!(G > 0)) throw std::invalid_argument("economy: growth factor G must be positive");
        if (!(k0 > 0)) throw std::invalid_argument("economy: initial capital must be positive");
        if (!(tech.fprime_at_infinity() < G)) {
            throw std::invalid_argument("economy: f'(inf) must be below G");
        }
    }
};

/// G x + p - s(w, f'(x)), strictly increasing in x.
template <RealNumber Real>
Real transition_residual(const Economy<Real>& econ, const Real& w, const Real& p, const Real& x) {
    return econ.G * x + p - savings(econ.savings, w, econ.tech.fprime(x));
}

/// Root of the transition equation by bracketing bisection, given the current
/// wage. Returns nullopt when the left-hand side is nonnegative at every
/// probe down to kProbeFloor, i.e. (k, p) lies outside dom g.
template <RealNumber Real>
std::optional<Real> transition_bracketed_from_wage(const Economy<Real>& econ, const Real& w, const Real& p) {
    // s < w, so the residual is positive at x = w / G.
    Real hi = w / econ.G;
    Real lo = hi;
    const Real floor = Real(kProbeFloor);
    for (;;) {
        lo = lo * Real(1e-8);
        if (lo < floor) lo = floor;
        if (transition_residual(econ, w, p, lo) < 0) break;
        hi = lo;
        if (lo == floor) return std::nullopt;
    }
    auto h = [&](const Real& x) { return transition_residual(econ, w, p, x); };
    const auto b = bisect_sign_change(h, lo, hi, /*positive_side_high=*/true);
    using std::abs;
    const Real rlo = abs(h(b.lo)), rhi = abs(h(b.hi));
    return rlo <= rhi ? b.lo : b.hi;
}

/// x = g(k, p) given the current wage w = w(k). Interest-inelastic savings
/// make the equation linear in x and it is solved directly; otherwise the
/// bracketed solver is used.
template <RealNumber Real>
std::optional<Real> transition_from_wage(const Economy<Real>& econ, const Real& w, const Real& p) {
    if (!(p >= 0)) throw std::domain_error("transition: price must be nonnegative");
    if (!econ.savings.interest_elastic()) {
        const Real x = (savings(econ.savings, w, Real(1)) - p) / econ.G;
        if (!(x > 0)) return std::nullopt;
        return x;
    }
    return transition_bracketed_from_wage(econ, w, p);
}

template <RealNumber Real>
std::optional<Real> transition(const Economy<Real>& econ, const Real& k, const Real& p) {
    return transition_from_wage(econ, wage(econ.tech, k), p);
}

template <RealNumber Real>
std::optional<Real> transition_bracketed(const Economy<Real>& econ, const Real& k, const Real& p) {
    if (!(p >= 0)) throw std::domain_error("transition: price must be nonnegative");
    return transition_bracketed_from_wage(econ, wage(econ.tech, k), p);
}

/// Asset price consistent with steady-state capital k:
/// p(k) = s(w(k), f'(k)) - G k.
template <RealNumber Real>
Real p_of_k(const Economy<Real>& econ, const Real& k) {
    const auto pt = econ.tech.eval(k);
    return savings(econ.savings, pt.wage, pt.fprime) - econ.G * k;
}

/// Supremum of feasible savings out of wage w, s(w, f'(0+)). Any price at or
/// above it leaves no positive capital.
template <RealNumber Real>
Real savings_cap(const Economy<Real>& econ, const Real& w) {
    return savings(econ.savings, w, econ.tech.fprime_near_zero());
}

// ---------------------------------------------------------------------------
// Scalar conversion

/// Rebuilds an economy in another scalar type. Parameters are converted
/// through double; separable marginal utilities keep their double-precision
/// callbacks.
template <RealNumber To, RealNumber From>
Economy<To> economy_cast(const Economy<From>& econ) {
    auto cv = [](const From& x) { return To(to_double(x)); };
    const auto& t = econ.tech;
    const Technology<To> tech = t.kind() == TechnologyKind::cobb_douglas
                                    ? Technology<To>::cobb_douglas(cv(t.A()), cv(t.alpha()), cv(t.delta()))
                                    : Technology<To>::cd_plus_log(cv(t.A()), cv(t.alpha()), cv(t.theta()));
    SavingsRule<To> rule = SavingsRule<To>::log_utility(To(0.5));
    if (econ.savings.kind() == SavingsKind::log) {
        rule = SavingsRule<To>::log_utility(cv(econ.savings.beta()));
    } else {
        auto wrap = [](typename SavingsRule<From>::Marginal m) {
            return [m](const To& c) { return To(to_double(m(From(to_double(c))))); };
        };
        rule = SavingsRule<To>::separable(wrap(econ.savings.u_prime()), wrap(econ.savings.v_prime()));
    }
    const auto& d = econ.dividends;
    std::vector<To> values;
    values.reserve(d.values().size());
    for (const auto& v : d.values()) values.push_back(cv(v));
    std::optional<To> declared;
    if (d.kind() != DividendKind::geometric) {
        if (auto gd = d.declared_growth(econ.G)) declared = cv(*gd);
    }
    DividendStream<To> stream = DividendStream<To>::zero();
    switch (d.kind()) {
        case DividendKind::geometric: stream = DividendStream<To>::geometric(cv(d.level()), cv(d.ratio())); break;
        case DividendKind::explicit_sequence:
            stream = DividendStream<To>::explicit_sequence(std::move(values), d.tail(), cv(d.ratio()));
            if (declared) stream.declare_growth(*declared);
            break;
        case DividendKind::constructed: stream = DividendStream<To>::constructed(std::move(values), declared); break;
    }
    return Economy<To>(cv(econ.G), tech, std::move(rule), std::move(stream), cv(econ.k0));
}

}  // namespace olg
