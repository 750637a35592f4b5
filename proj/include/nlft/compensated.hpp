#pragma once

// Double-double ("compensated") arithmetic for accumulating products of
// SL(2, C) matrices. A value is hi + lo with |lo| <= ulp(hi)/2, giving about
// 106 bits of significand. Only the operations the propagator needs are here.

#include <cmath>
#include <complex>

namespace nlft::compensated {

struct DD {
    double hi = 0.0;
    double lo = 0.0;

    constexpr DD() = default;
    constexpr DD(double h) : hi(h), lo(0.0) {}  // NOLINT(google-explicit-constructor)
    constexpr DD(double h, double l) : hi(h), lo(l) {}

    [[nodiscard]] double value() const { return hi + lo; }
};

namespace detail {

inline DD quick_two_sum(double a, double b) {
    const double s = a + b;
    return {s, b - (s - a)};
}

inline DD two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

inline DD two_prod(double a, double b) {
    const double p = a * b;
#if defined(__FMA__) || defined(FP_FAST_FMA)
    return {p, std::fma(a, b, -p)};
#else
    // Dekker split
    constexpr double split = 134217729.0;  // 2^27 + 1
    const double ta = split * a;
    const double ahi = ta - (ta - a);
    const double alo = a - ahi;
    const double tb = split * b;
    const double bhi = tb - (tb - b);
    const double blo = b - bhi;
    return {p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo};
#endif
}

}  // namespace detail

inline DD operator+(DD a, DD b) {
    DD s = detail::two_sum(a.hi, b.hi);
    const DD t = detail::two_sum(a.lo, b.lo);
    s.lo += t.hi;
    s = detail::quick_two_sum(s.hi, s.lo);
    s.lo += t.lo;
    return detail::quick_two_sum(s.hi, s.lo);
}

inline DD operator-(DD a) { return {-a.hi, -a.lo}; }
inline DD operator-(DD a, DD b) { return a + (-b); }

inline DD operator*(DD a, double b) {
    DD p = detail::two_prod(a.hi, b);
    p.lo += a.lo * b;
    return detail::quick_two_sum(p.hi, p.lo);
}

inline DD operator*(DD a, DD b) {
    DD p = detail::two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return detail::quick_two_sum(p.hi, p.lo);
}

inline DD operator/(DD a, double b) {
    const double q1 = a.hi / b;
    const DD r = a - detail::two_prod(q1, b);
    return detail::quick_two_sum(q1, r.hi / b);
}

/// Complex number with double-double parts.
struct CDD {
    DD re;
    DD im;

    CDD() = default;
    CDD(DD r, DD i) : re(r), im(i) {}
    CDD(std::complex<double> z) : re(z.real()), im(z.imag()) {}  // NOLINT(google-explicit-constructor)

    [[nodiscard]] std::complex<double> value() const { return {re.value(), im.value()}; }
};

inline CDD operator+(const CDD& a, const CDD& b) { return {a.re + b.re, a.im + b.im}; }
inline CDD operator-(const CDD& a, const CDD& b) { return {a.re - b.re, a.im - b.im}; }

inline CDD operator*(const CDD& a, const CDD& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

inline CDD operator*(std::complex<double> a, const CDD& b) {
    return {b.re * a.real() - b.im * a.imag(), b.im * a.real() + b.re * a.imag()};
}

inline CDD operator*(const CDD& a, double b) { return {a.re * b, a.im * b}; }
inline CDD operator/(const CDD& a, double b) { return {a.re / b, a.im / b}; }

/// Multiplication by i.
inline CDD times_i(const CDD& a) { return {-a.im, a.re}; }

/// 2x2 complex matrix in double precision, row-major.
struct Mat2 {
    std::complex<double> a{}, b{}, c{}, d{};

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 zero() { return {}; }
};

inline Mat2 operator+(const Mat2& x, const Mat2& y) {
    return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
}

inline Mat2 operator*(std::complex<double> s, const Mat2& m) {
    return {s * m.a, s * m.b, s * m.c, s * m.d};
}

inline Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

inline double frobenius_sq(const Mat2& m) {
    return std::norm(m.a) + std::norm(m.b) + std::norm(m.c) + std::norm(m.d);
}

/// 2x2 complex matrix with double-double entries.
struct Mat2DD {
    CDD a, b, c, d;

    static Mat2DD identity() { return {CDD(1.0), CDD(0.0), CDD(0.0), CDD(1.0)}; }
    static Mat2DD zero() { return {CDD(0.0), CDD(0.0), CDD(0.0), CDD(0.0)}; }

    [[nodiscard]] Mat2 value() const { return {a.value(), b.value(), c.value(), d.value()}; }
};

/// Left multiplication of an extended-precision matrix by a double matrix.
inline Mat2DD operator*(const Mat2& p, const Mat2DD& m) {
    return {p.a * m.a + p.b * m.c, p.a * m.b + p.b * m.d,
            p.c * m.a + p.d * m.c, p.c * m.b + p.d * m.d};
}

inline Mat2DD operator*(const Mat2DD& p, const Mat2DD& m) {
    return {p.a * m.a + p.b * m.c, p.a * m.b + p.b * m.d,
            p.c * m.a + p.d * m.c, p.c * m.b + p.d * m.d};
}

inline Mat2DD operator+(const Mat2DD& x, const Mat2DD& y) {
    return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
}

/// det(m) - 1 evaluated in double-double.
inline std::complex<double> det_minus_one(const Mat2DD& m) {
    const CDD det = m.a * m.d - m.b * m.c;
    return CDD(det.re - DD(1.0), det.im).value();
}

}  // namespace nlft::compensated
