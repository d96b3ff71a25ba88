#pragma once

// Scalar plumbing shared by the templated model code. Every algorithm in the
// library is written against a generic `Real`; `double` is the default and
// `mp_real` (MPFR, runtime-selected precision) is used where forward shooting
// through an unstable recursion needs more digits than a double carries.

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <concepts>
#include <limits>
#include <type_traits>

namespace olg {

using mp_real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                              boost::multiprecision::et_off>;

template <class Real>
concept RealNumber = std::same_as<Real, double> || std::same_as<Real, mp_real>;

/// Sets the working precision of `mp_real` for the lifetime of the guard.
/// MPFR default precision is process-global, so multiprecision work is
/// single-threaded.
class ScopedDigits {
public:
    explicit ScopedDigits(unsigned digits10) : saved_(mp_real::default_precision()) {
        mp_real::default_precision(digits10);
    }
    ~ScopedDigits() { mp_real::default_precision(saved_); }
    ScopedDigits(const ScopedDigits&) = delete;
    ScopedDigits& operator=(const ScopedDigits&) = delete;

private:
    unsigned saved_;
};

template <RealNumber Real>
inline double to_double(const Real& x) {
    if constexpr (std::is_same_v<Real, double>) {
        return x;
    } else {
        return x.template convert_to<double>();
    }
}

template <RealNumber Real>
inline Real from_double(double x) {
    return Real(x);
}

/// Unit roundoff at the current working precision.
template <RealNumber Real>
inline Real epsilon() {
    if constexpr (std::is_same_v<Real, double>) {
        return std::numeric_limits<double>::epsilon();
    } else {
        return std::numeric_limits<mp_real>::epsilon();
    }
}

/// Decimal digits carried by Real at the current working precision.
template <RealNumber Real>
inline unsigned working_digits() {
    if constexpr (std::is_same_v<Real, double>) {
        return std::numeric_limits<double>::digits10;
    } else {
        return mp_real::default_precision();
    }
}

/// Smallest positive capital probe; stands in for k -> 0+ wherever a limit
/// at zero is needed (Inada probes, dom g detection).
inline constexpr double kProbeFloor = 1e-300;

inline double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), std::numeric_limits<double>::min()});
    return std::abs(a - b) / scale;
}

template <RealNumber Real>
inline double rel_diff(const Real& a, const Real& b) {
    using std::abs;
    const Real scale = std::max(abs(a), abs(b));
    if (scale == 0) return 0.0;
    return to_double(Real(abs(a - b) / scale));
}

}  // namespace olg
