#pragma once

#include "olg/numeric.hpp"

#include <functional>
#include <optional>

namespace olg {

template <RealNumber Real>
struct Bracket {
    Real lo;
    Real hi;
    int iterations = 0;

    Real mid() const { return lo + (hi - lo) / 2; }
    Real width() const { return hi - lo; }
};

inline constexpr int kMaxBisection = 200;

/// Bisection for a monotone sign change on [lo, hi]. `positive_side_high`
/// tells which end the function is positive on. Steps geometrically while the
/// bracket spans more than a factor of four on the positive axis, then
/// arithmetically, and stops when the bracket no longer shrinks, when
/// width <= abs_tol + rel_tol*|mid|, or after `max_iter` halvings.
template <RealNumber Real, class F>
Bracket<Real> bisect_sign_change(F&& fn, Real lo, Real hi, bool positive_side_high,
                                 double rel_tol = 0.0, double abs_tol = 0.0,
                                 int max_iter = kMaxBisection) {
    using std::abs;
    using std::sqrt;
    Bracket<Real> b{lo, hi, 0};
    for (; b.iterations < max_iter; ++b.iterations) {
        Real m;
        if (b.lo > 0 && b.hi > 4 * b.lo) {
            m = sqrt(b.lo * b.hi);
        } else {
            m = b.mid();
        }
        if (!(m > b.lo && m < b.hi)) break;
        const Real v = fn(m);
        const bool positive = v > 0;
        if (positive == positive_side_high) {
            b.hi = m;
        } else {
            b.lo = m;
        }
        if (v == 0) {
            b.lo = b.hi = m;
            break;
        }
        const Real tol = Real(abs_tol) + Real(rel_tol) * abs(b.mid());
        if (tol > 0 && b.width() <= tol) {
            ++b.iterations;
            break;
        }
    }
    return b;
}

}  // namespace olg
