#include "plab/extended.hpp"

#include <array>
#include <cstdint>

namespace plab {

namespace {

// Products whose magnitude falls below this lose bits of their residual to
// gradual underflow (2^-1022 * 2^53).
constexpr double kResidualUnderflow = 0x1p-969;

// Above this the Veltkamp splitter (2^27 + 1) * a overflows.
constexpr double kSplitLimit = 0x1p+995;

struct Split {
    double hi;
    double lo;
};

Split veltkamp_split(double a) noexcept {
    constexpr double splitter = 134217729.0;  // 2^27 + 1
    const double t = splitter * a;
    const double hi = t - (t - a);
    return {hi, a - hi};
}

}  // namespace

TwoTerm two_sum(double a, double b) {
    const TwoTerm r = detail::two_sum_unchecked(a, b);
    if (!std::isfinite(r.value)) throw RangeError("two_sum: sum overflows");
    return r;
}

TwoTerm two_prod_fma(double a, double b) noexcept {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

TwoTerm two_prod_dekker(double a, double b) noexcept {
    // Large operands are pre-scaled by a power of two so the split stays finite.
    int scale = 0;
    if (std::fabs(a) > kSplitLimit) {
        a = std::ldexp(a, -28);
        scale += 28;
    }
    if (std::fabs(b) > kSplitLimit) {
        b = std::ldexp(b, -28);
        scale += 28;
    }
    const double p = a * b;
    const Split as = veltkamp_split(a);
    const Split bs = veltkamp_split(b);
    const double e = ((as.hi * bs.hi - p) + as.hi * bs.lo + as.lo * bs.hi) + as.lo * bs.lo;
    if (scale == 0) return {p, e};
    return {std::ldexp(p, scale), std::ldexp(e, scale)};
}

TwoTerm two_prod(double a, double b) {
    const TwoTerm r = detail::two_prod_unchecked(a, b);
    if (!std::isfinite(r.value)) throw RangeError("two_prod: product overflows");
    if (a != 0.0 && b != 0.0 && std::fabs(r.value) < kResidualUnderflow)
        throw RangeError("two_prod: residual lost to underflow");
    return r;
}

DoubleDouble dd_div(DoubleDouble a, DoubleDouble b) {
    if (b.hi() == 0.0) throw DomainError("dd_div: division by zero");
    const double q1 = a.hi() / b.hi();
    DoubleDouble r = detail::add_unchecked(a, -detail::mul_unchecked(b, q1));
    const double q2 = r.hi() / b.hi();
    r = detail::add_unchecked(r, -detail::mul_unchecked(b, q2));
    const double q3 = r.hi() / b.hi();
    const DoubleDouble q = detail::add_unchecked(DoubleDouble::from_sum(q1, q2), q3);
    detail::check_range(q, "dd_div");
    return q;
}

DoubleDouble dd_sqrt(DoubleDouble a) {
    if (a.hi() < 0.0) throw DomainError("dd_sqrt: negative argument");
    if (a.hi() == 0.0) return {};
    if (!a.is_finite()) throw RangeError("dd_sqrt: non-finite argument");
    // One Newton correction on the native root.
    const double x = std::sqrt(a.hi());
    const TwoTerm sq = detail::two_prod_unchecked(x, x);
    const DoubleDouble residual =
        detail::add_unchecked(a, -DoubleDouble::from_normalized(sq.value, sq.error));
    const double correction = residual.hi() / (2.0 * x);
    const TwoTerm r = detail::fast_two_sum(x, correction);
    return DoubleDouble::from_normalized(r.value, r.error);
}

namespace {

// Reciprocal factorials 1/n!, n = 0..31, each rounded to double-double
// (generated with 400-bit mpmath). Taylor series through degree 31 on
// |r| <= pi/4 leaves a truncation error below 1e-37.
constexpr std::array<DoubleDouble, 32> kInvFactorial = {{
    DoubleDouble::from_normalized(1.0, 0.0),
    DoubleDouble::from_normalized(1.0, 0.0),
    DoubleDouble::from_normalized(0x1.0000000000000p-1, 0x0.0p+0),
    DoubleDouble::from_normalized(0x1.5555555555555p-3, 0x1.5555555555555p-57),
    DoubleDouble::from_normalized(0x1.5555555555555p-5, 0x1.5555555555555p-59),
    DoubleDouble::from_normalized(0x1.1111111111111p-7, 0x1.1111111111111p-63),
    DoubleDouble::from_normalized(0x1.6c16c16c16c17p-10, -0x1.f49f49f49f49fp-65),
    DoubleDouble::from_normalized(0x1.a01a01a01a01ap-13, 0x1.a01a01a01a01ap-73),
    DoubleDouble::from_normalized(0x1.a01a01a01a01ap-16, 0x1.a01a01a01a01ap-76),
    DoubleDouble::from_normalized(0x1.71de3a556c734p-19, -0x1.c154f8ddc6c00p-73),
    DoubleDouble::from_normalized(0x1.27e4fb7789f5cp-22, 0x1.cbbc05b4fa99ap-76),
    DoubleDouble::from_normalized(0x1.ae64567f544e4p-26, -0x1.c062e06d1f209p-80),
    DoubleDouble::from_normalized(0x1.1eed8eff8d898p-29, -0x1.2aec959e14c06p-83),
    DoubleDouble::from_normalized(0x1.6124613a86d09p-33, 0x1.f28e0cc748ebep-87),
    DoubleDouble::from_normalized(0x1.93974a8c07c9dp-37, 0x1.05d6f8a2efd1fp-92),
    DoubleDouble::from_normalized(0x1.ae7f3e733b81fp-41, 0x1.1d8656b0ee8cbp-97),
    DoubleDouble::from_normalized(0x1.ae7f3e733b81fp-45, 0x1.1d8656b0ee8cbp-101),
    DoubleDouble::from_normalized(0x1.952c77030ad4ap-49, 0x1.ac981465ddc6cp-103),
    DoubleDouble::from_normalized(0x1.6827863b97d97p-53, 0x1.eec01221a8b0bp-107),
    DoubleDouble::from_normalized(0x1.2f49b46814157p-57, 0x1.2650f61dbdcb4p-112),
    DoubleDouble::from_normalized(0x1.e542ba4020225p-62, 0x1.ea72b4afe3c2fp-120),
    DoubleDouble::from_normalized(0x1.71b8ef6dcf572p-66, -0x1.d043ae40c4647p-120),
    DoubleDouble::from_normalized(0x1.0ce396db7f853p-70, -0x1.aebcdbd20331cp-124),
    DoubleDouble::from_normalized(0x1.761b41316381ap-75, -0x1.3423c7d91404fp-130),
    DoubleDouble::from_normalized(0x1.f2cf01972f578p-80, -0x1.9ada5fcc1ab14p-135),
    DoubleDouble::from_normalized(0x1.3f3ccdd165fa9p-84, -0x1.58ddadf344487p-139),
    DoubleDouble::from_normalized(0x1.88e85fc6a4e5ap-89, -0x1.71c37ebd16540p-143),
    DoubleDouble::from_normalized(0x1.d1ab1c2dccea3p-94, 0x1.054d0c78aea14p-149),
    DoubleDouble::from_normalized(0x1.0a18a2635085dp-98, 0x1.b9e2e28e1aa54p-153),
    DoubleDouble::from_normalized(0x1.259f98b4358adp-103, 0x1.eaf8c39dd9bc5p-157),
    DoubleDouble::from_normalized(0x1.3932c5047d60ep-108, 0x1.832b7b530a627p-162),
    DoubleDouble::from_normalized(0x1.434d2e783f5bcp-113, 0x1.0b87b91be9affp-167),
}};

// Horner in r^2 over the alternating coefficients 1/(first)!, 1/(first+2)!, ...
DoubleDouble alternating_series(DoubleDouble r2, int first) noexcept {
    int n = first;
    while (n + 2 < static_cast<int>(kInvFactorial.size())) n += 2;
    const bool negative_top = ((n - first) / 2) % 2 == 1;
    DoubleDouble acc = negative_top ? -kInvFactorial[n] : kInvFactorial[n];
    for (n -= 2; n >= first; n -= 2) {
        const bool negative = ((n - first) / 2) % 2 == 1;
        const DoubleDouble c = negative ? -kInvFactorial[n] : kInvFactorial[n];
        acc = detail::add_unchecked(detail::mul_unchecked(acc, r2), c);
    }
    return acc;
}

}  // namespace

DDSinCos dd_sincos(DoubleDouble theta) {
    if (!theta.is_finite()) throw DomainError("dd_sincos: non-finite angle");
    if (std::fabs(theta.hi()) > kSinCosMaxArgument)
        throw DomainError("dd_sincos: angle outside the reduction window");

    // Cody-Waite reduction against the three-part pi/2; q * part_1 and
    // q * part_2 are formed exactly.
    const double q = std::nearbyint(theta.hi() / dd_const::half_pi_1);
    DoubleDouble r = theta;
    if (q != 0.0) {
        const TwoTerm p1 = detail::two_prod_unchecked(q, dd_const::half_pi_1);
        const TwoTerm p2 = detail::two_prod_unchecked(q, dd_const::half_pi_2);
        r = detail::add_unchecked(r, -DoubleDouble::from_normalized(p1.value, p1.error));
        r = detail::add_unchecked(r, -DoubleDouble::from_normalized(p2.value, p2.error));
        r = detail::add_unchecked(r, DoubleDouble(-q * dd_const::half_pi_3));
    }

    const DoubleDouble r2 = detail::mul_unchecked(r, r);
    const DoubleDouble s = detail::mul_unchecked(r, alternating_series(r2, 1));
    const DoubleDouble c = alternating_series(r2, 0);

    const auto quadrant = static_cast<std::int64_t>(q) & 3;
    switch (quadrant) {
        case 0: return {s, c};
        case 1: return {c, -s};
        case 2: return {-s, -c};
        default: return {-c, s};
    }
}

}  // namespace plab
