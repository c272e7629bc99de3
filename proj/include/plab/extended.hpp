#pragma once

// Double-double arithmetic: a value is the unevaluated sum hi + lo of two
// IEEE binary64 numbers with |lo| <= ulp(hi)/2, giving a 106-bit significand
// (about 32 significant decimal digits) over the binary64 exponent range.
//
// Addition and multiplication follow the accurate algorithms analysed by
// Joldes, Muller and Popescu (ACM TOMS 44, 2017):
//   dd_add  AccurateDWPlusDW   relative error <= 3u^2
//   dd_mul  DWTimesDW1         relative error <= 7u^2
// with u = 2^-53.

#include <cmath>

#include "plab/errors.hpp"

namespace plab {

// Result of an error-free transformation: value + error equals the exact
// result of the operation on the two inputs.
struct TwoTerm {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

// Requires |a| >= |b| or a == 0.
inline TwoTerm fast_two_sum(double a, double b) noexcept {
    const double s = a + b;
    const double z = s - a;
    return {s, b - z};
}

inline TwoTerm two_sum_unchecked(double a, double b) noexcept {
    const double s = a + b;
    const double bb = s - a;
    const double e = (a - (s - bb)) + (b - bb);
    return {s, e};
}

}  // namespace detail

// Knuth's branch-free two-sum. Throws RangeError when a + b overflows.
TwoTerm two_sum(double a, double b);

// Exact product through a single fused multiply-add.
TwoTerm two_prod_fma(double a, double b) noexcept;

// Exact product through Veltkamp splitting (Dekker). Valid while
// |a|, |b| < 2^996 so the splitter does not overflow.
TwoTerm two_prod_dekker(double a, double b) noexcept;

namespace detail {

inline TwoTerm two_prod_unchecked(double a, double b) noexcept {
#if defined(FP_FAST_FMA)
    return two_prod_fma(a, b);
#else
    return two_prod_dekker(a, b);
#endif
}

}  // namespace detail

// Uses hardware FMA when the target advertises it (FP_FAST_FMA), Dekker
// splitting otherwise. Throws RangeError on overflow, or when the product is
// so small that its residual would be lost to underflow.
TwoTerm two_prod(double a, double b);

class DoubleDouble {
public:
    constexpr DoubleDouble() noexcept = default;

    // Implicit on purpose: a native float is exactly representable.
    constexpr DoubleDouble(double x) noexcept : hi_(x), lo_(0.0) {}  // NOLINT

    // Renormalizes an arbitrary pair so that the invariant holds.
    static DoubleDouble from_sum(double a, double b) noexcept {
        const TwoTerm t = detail::two_sum_unchecked(a, b);
        return {t.value, t.error, Normalized{}};
    }

    // Trusts the caller that |lo| <= ulp(hi)/2.
    static constexpr DoubleDouble from_normalized(double hi, double lo) noexcept {
        return {hi, lo, Normalized{}};
    }

    constexpr double hi() const noexcept { return hi_; }
    constexpr double lo() const noexcept { return lo_; }

    constexpr double to_native() const noexcept { return hi_; }

    bool is_finite() const noexcept { return std::isfinite(hi_) && std::isfinite(lo_); }

    // hi is the nearest native float to hi + lo.
    bool is_normalized() const noexcept { return hi_ + lo_ == hi_; }

    constexpr DoubleDouble operator-() const noexcept { return {-hi_, -lo_, Normalized{}}; }

    friend constexpr bool operator==(const DoubleDouble&, const DoubleDouble&) = default;

private:
    struct Normalized {};
    constexpr DoubleDouble(double hi, double lo, Normalized) noexcept : hi_(hi), lo_(lo) {}

    double hi_ = 0.0;
    double lo_ = 0.0;
};

inline DoubleDouble dd_from(double x) noexcept { return DoubleDouble(x); }
inline double dd_to_native(DoubleDouble a) noexcept { return a.to_native(); }

namespace detail {

inline DoubleDouble add_unchecked(DoubleDouble a, DoubleDouble b) noexcept {
    TwoTerm s = two_sum_unchecked(a.hi(), b.hi());
    const TwoTerm t = two_sum_unchecked(a.lo(), b.lo());
    double c = s.error + t.value;
    s = fast_two_sum(s.value, c);
    c = s.error + t.error;
    s = fast_two_sum(s.value, c);
    return DoubleDouble::from_normalized(s.value, s.error);
}

// Cross terms are summed in a fixed symmetric order so the product is
// bit-exactly commutative.
inline DoubleDouble mul_unchecked(DoubleDouble a, DoubleDouble b) noexcept {
    const TwoTerm p = two_prod_unchecked(a.hi(), b.hi());
    const double cross = a.hi() * b.lo() + a.lo() * b.hi();
    const TwoTerm r = fast_two_sum(p.value, p.error + cross);
    return DoubleDouble::from_normalized(r.value, r.error);
}

inline void check_range(DoubleDouble r, const char* op) {
    if (!r.is_finite()) throw RangeError(std::string("double-double overflow in ") + op);
}

}  // namespace detail

inline DoubleDouble dd_add(DoubleDouble a, DoubleDouble b) {
    const DoubleDouble r = detail::add_unchecked(a, b);
    detail::check_range(r, "dd_add");
    return r;
}

inline DoubleDouble dd_sub(DoubleDouble a, DoubleDouble b) { return dd_add(a, -b); }

inline DoubleDouble dd_mul(DoubleDouble a, DoubleDouble b) {
    const DoubleDouble r = detail::mul_unchecked(a, b);
    detail::check_range(r, "dd_mul");
    return r;
}

DoubleDouble dd_div(DoubleDouble a, DoubleDouble b);

// Requires a >= 0.
DoubleDouble dd_sqrt(DoubleDouble a);

inline DoubleDouble dd_abs(DoubleDouble a) noexcept { return a.hi() < 0.0 ? -a : a; }

inline DoubleDouble operator+(DoubleDouble a, DoubleDouble b) { return dd_add(a, b); }
inline DoubleDouble operator-(DoubleDouble a, DoubleDouble b) { return dd_sub(a, b); }
inline DoubleDouble operator*(DoubleDouble a, DoubleDouble b) { return dd_mul(a, b); }
inline DoubleDouble operator/(DoubleDouble a, DoubleDouble b) { return dd_div(a, b); }
inline DoubleDouble& operator+=(DoubleDouble& a, DoubleDouble b) { return a = a + b; }
inline DoubleDouble& operator-=(DoubleDouble& a, DoubleDouble b) { return a = a - b; }
inline DoubleDouble& operator*=(DoubleDouble& a, DoubleDouble b) { return a = a * b; }

inline bool operator<(DoubleDouble a, DoubleDouble b) noexcept {
    return a.hi() < b.hi() || (a.hi() == b.hi() && a.lo() < b.lo());
}

namespace dd_const {

// pi/2 split into three binary64 parts, about 160 correct bits in total.
inline constexpr double half_pi_1 = 0x1.921fb54442d18p+0;
inline constexpr double half_pi_2 = 0x1.1a62633145c07p-54;
inline constexpr double half_pi_3 = -0x1.f1976b7ed8fbcp-110;

inline constexpr DoubleDouble half_pi = DoubleDouble::from_normalized(half_pi_1, half_pi_2);
inline constexpr DoubleDouble pi = DoubleDouble::from_normalized(2 * half_pi_1, 2 * half_pi_2);
inline constexpr DoubleDouble quarter_pi =
    DoubleDouble::from_normalized(0.5 * half_pi_1, 0.5 * half_pi_2);
inline constexpr DoubleDouble deg_to_rad =
    DoubleDouble::from_normalized(0x1.1df46a2529d39p-6, 0x1.5c1d8becdd291p-62);

}  // namespace dd_const

struct DDSinCos {
    DoubleDouble sin;
    DoubleDouble cos;
};

// Largest |theta| accepted by dd_sincos.
inline constexpr double kSinCosMaxArgument = 2.0 * 3.141592653589793 * 1.0e4;

// Sine and cosine of an angle in radians. Throws DomainError for non-finite
// input or |theta| > kSinCosMaxArgument.
DDSinCos dd_sincos(DoubleDouble theta);

}  // namespace plab
