#pragma once

#include <cmath>
#include <cstdint>

namespace kron {

/// Double-double value: hi + lo with |lo| <= ulp(hi)/2, ~31 significant digits.
///
/// The lattice side works with Cartan-flow images whose raw bases are skewed by
/// factors up to e^{30..36}; recovering O(1) short vectors from them needs the
/// products k*alpha etc. carried beyond double precision.  Only the handful of
/// operations used there are implemented.
struct dd {
    double hi = 0.0;
    double lo = 0.0;

    dd() = default;
    dd(double h) : hi(h), lo(0.0) {}
    dd(double h, double l) : hi(h), lo(l) {}

    explicit operator double() const { return hi + lo; }
};

namespace detail {
inline dd twoSum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}
inline dd quickTwoSum(double a, double b) { // requires |a| >= |b|
    double s = a + b;
    return {s, b - (s - a)};
}
inline dd twoProd(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}
} // namespace detail

inline dd operator+(dd a, dd b) {
    dd s = detail::twoSum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    return detail::quickTwoSum(s.hi, s.lo);
}
inline dd operator-(dd a) { return {-a.hi, -a.lo}; }
inline dd operator-(dd a, dd b) { return a + (-b); }
inline dd operator*(dd a, dd b) {
    dd p = detail::twoProd(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return detail::quickTwoSum(p.hi, p.lo);
}
inline dd operator/(dd a, dd b) {
    double q1 = a.hi / b.hi;
    dd r = a - b * dd(q1);
    double q2 = r.hi / b.hi;
    r = r - b * dd(q2);
    double q3 = r.hi / b.hi;
    dd q = detail::quickTwoSum(q1, q2);
    return q + dd(q3);
}

inline dd dd_mul(double a, double b) { return detail::twoProd(a, b); }
inline dd dd_from_i64(std::int64_t v) {
    // |v| < 2^63; split into two exactly representable halves
    double hi = static_cast<double>(v);
    double lo = static_cast<double>(v - static_cast<std::int64_t>(hi));
    return detail::quickTwoSum(hi, lo);
}

inline bool operator<(dd a, dd b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(dd a, dd b) { return b < a; }
inline bool operator<=(dd a, dd b) { return !(b < a); }
inline bool operator>=(dd a, dd b) { return !(a < b); }

inline dd dd_abs(dd a) { return a.hi < 0 || (a.hi == 0 && a.lo < 0) ? -a : a; }

/// round to nearest integer (double is exact for the magnitudes used here)
inline double dd_round(dd a) { return std::round(a.hi + a.lo); }

/// fractional part in [0,1)
inline dd dd_frac(dd a) {
    double f = std::floor(a.hi);
    dd r = a - dd(f);
    // a.lo may push the result across an integer boundary
    while (r.hi + r.lo < 0.0) r = r + dd(1.0);
    while (r.hi + r.lo >= 1.0) r = r - dd(1.0);
    return r;
}

} // namespace kron
