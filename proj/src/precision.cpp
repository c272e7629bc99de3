#include "plab/precision.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "plab/errors.hpp"
#include "plab/extended.hpp"

namespace plab {

namespace {

// Every power of ten up to 1e22 is exact in binary64.
constexpr int kMaxExactPow10 = 22;
constexpr std::array<double, kMaxExactPow10 + 1> kPow10 = {
    1e0,  1e1,  1e2,  1e3,  1e4,  1e5,  1e6,  1e7,  1e8,  1e9,  1e10, 1e11,
    1e12, 1e13, 1e14, 1e15, 1e16, 1e17, 1e18, 1e19, 1e20, 1e21, 1e22};

// Scaled values at or above this no longer carry a fractional part on the
// fast path's integer grid.
constexpr double kFastPathLimit = 0x1p+52;

// Keeps two_prod residuals clear of gradual underflow.
constexpr double kFastPathMinMagnitude = 0x1p-900;

// Rounds the exact value hi + lo (hi the nearest float, |hi| < 2^52) to an
// integer. Only an exact half in hi lets lo decide the direction.
double round_to_integer(double hi, double lo, TieRule rule) noexcept {
    const double fl = std::floor(hi);
    const double frac = hi - fl;
    int cmp;
    if (frac > 0.5) {
        cmp = 1;
    } else if (frac < 0.5) {
        cmp = -1;
    } else {
        cmp = (lo > 0.0) - (lo < 0.0);
    }
    if (cmp > 0) return fl + 1.0;
    if (cmp < 0) return fl;
    if (rule == TieRule::HalfAwayFromZero) return fl + 0.5 > 0.0 ? fl + 1.0 : fl;
    return std::fmod(fl, 2.0) == 0.0 ? fl : fl + 1.0;
}

bool round_fast(double x, int p, TieRule rule, double& out) noexcept {
    if (p > kMaxExactPow10 || p < -kMaxExactPow10) return false;
    const double ax = std::fabs(x);
    if (ax < kFastPathMinMagnitude) return false;

    if (p >= 0) {
        const double scale = kPow10[static_cast<std::size_t>(p)];
        const TwoTerm y = detail::two_prod_unchecked(x, scale);
        if (!(std::fabs(y.value) < kFastPathLimit)) return false;
        const double n = round_to_integer(y.value, y.error, rule);
        out = std::copysign(n / scale, x);
        return true;
    }

    const double scale = kPow10[static_cast<std::size_t>(-p)];
    const double q = x / scale;
    if (!(std::fabs(q) < kFastPathLimit)) return false;
    // Division residual is exact; only its sign and size matter here.
    const double r = std::fma(-q, scale, x);
    const double n = round_to_integer(q, r / scale, rule);
    out = std::copysign(n * scale, x);
    return true;
}

// Number of fractional decimal digits in the exact expansion of x.
int exact_fraction_digits(double x) noexcept {
    int e = 0;
    std::frexp(x, &e);
    const int lsb = std::max(e - 53, -1074);
    return lsb < 0 ? -lsb : 0;
}

// Exact "%f" expansion of |x| split into digits and the count of integer digits.
struct DecimalDigits {
    std::string digits;
    int int_digits = 0;
};

DecimalDigits exact_digits(double ax, int min_fraction) {
    const int prec = std::max(min_fraction, exact_fraction_digits(ax));
    std::vector<char> buf(static_cast<std::size_t>(prec) + 400);
    const int len = std::snprintf(buf.data(), buf.size(), "%.*f", prec, ax);
    DecimalDigits d;
    d.digits.reserve(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) {
        const char c = buf[static_cast<std::size_t>(i)];
        if (c == '.') {
            d.int_digits = static_cast<int>(d.digits.size());
        } else {
            d.digits.push_back(c);
        }
    }
    if (d.int_digits == 0) d.int_digits = static_cast<int>(d.digits.size());
    return d;
}

// Slow path: round the exact decimal expansion of x at 10^-p, parse back.
double round_string(double x, int p, TieRule rule) {
    const double ax = std::fabs(x);
    DecimalDigits d = exact_digits(ax, std::max(p + 1, 0));
    const int keep = d.int_digits + p;  // digits at or above the 10^-p place
    if (keep < 0) return std::copysign(0.0, x);

    const auto at = [&](int i) -> int {
        return i < static_cast<int>(d.digits.size()) ? d.digits[static_cast<std::size_t>(i)] - '0'
                                                     : 0;
    };
    const int next = at(keep);
    bool up = false;
    if (next > 5) {
        up = true;
    } else if (next == 5) {
        bool rest_nonzero = false;
        for (int i = keep + 1; i < static_cast<int>(d.digits.size()); ++i) {
            if (at(i) != 0) {
                rest_nonzero = true;
                break;
            }
        }
        if (rest_nonzero || rule == TieRule::HalfAwayFromZero) {
            up = true;
        } else {
            up = keep > 0 && at(keep - 1) % 2 == 1;
        }
    }

    std::string kept = "0" + d.digits.substr(0, static_cast<std::size_t>(keep));
    if (up) {
        for (auto i = kept.size(); i-- > 0;) {
            if (kept[i] == '9') {
                kept[i] = '0';
            } else {
                ++kept[i];
                break;
            }
        }
    }
    kept += "e" + std::to_string(-p);
    const double v = std::strtod(kept.c_str(), nullptr);
    return std::copysign(v, x);
}

double round_at(double x, int p, TieRule rule) {
    if (x == 0.0) return x;
    double out = 0.0;
    if (round_fast(x, p, rule, out)) return out;
    return round_string(x, p, rule);
}

void require_finite(double x, const char* op) {
    if (!std::isfinite(x)) throw DomainError(std::string(op) + ": non-finite input");
}

// Whether |x| >= 10^k, decided exactly.
bool at_least_pow10(double ax, int k) {
    if (k >= 0 && k <= kMaxExactPow10) return ax >= kPow10[static_cast<std::size_t>(k)];
    if (k < 0 && k >= -kMaxExactPow10 && ax >= kFastPathMinMagnitude) {
        const TwoTerm y = detail::two_prod_unchecked(ax, kPow10[static_cast<std::size_t>(-k)]);
        return y.value > 1.0 || (y.value == 1.0 && y.error >= 0.0);
    }
    // Exact scientific expansion; 800 digits exceed any binary64 expansion.
    std::vector<char> buf(1000);
    std::snprintf(buf.data(), buf.size(), "%.800e", ax);
    const char* e = std::strchr(buf.data(), 'e');
    return std::atoi(e + 1) >= k;
}

}  // namespace

int decimal_exponent(double x) {
    require_finite(x, "decimal_exponent");
    const double ax = std::fabs(x);
    if (ax == 0.0) throw DomainError("decimal_exponent: zero has no decimal exponent");
    const double l = std::log10(ax);
    const double nearest = std::nearbyint(l);
    if (std::fabs(l - nearest) > 1e-9) return static_cast<int>(std::floor(l));
    const int k = static_cast<int>(nearest);
    return at_least_pow10(ax, k) ? k : k - 1;
}

PrecisionSpec PrecisionSpec::sig_digits(int n) {
    if (n < kMinSigDigits || n > kMaxSigDigits)
        throw ParameterError("significant digits must be in [1, 17], got " + std::to_string(n));
    return PrecisionSpec(PrecisionMode::SigDigits, n);
}

PrecisionSpec PrecisionSpec::decimal_places(int p) {
    if (p < kMinDecimalPlaces || p > kMaxDecimalPlaces)
        throw ParameterError("decimal places must be in [-15, 15], got " + std::to_string(p));
    return PrecisionSpec(PrecisionMode::DecimalPlaces, p);
}

PrecisionSpec PrecisionSpec::parse(std::string_view text) {
    if (text == "native") return native();
    if (text == "extended") return extended();
    const bool places = !text.empty() && text.front() == 'p';
    if (places) text.remove_prefix(1);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
        throw ParameterError("unrecognized precision '" + std::string(text) +
                             "' (expected native, extended, <n> or p<k>)");
    return places ? decimal_places(value) : sig_digits(value);
}

double PrecisionSpec::nominal_digits() const noexcept {
    switch (mode_) {
        case PrecisionMode::Native: return 17.5;
        case PrecisionMode::Extended: return 31.9;
        case PrecisionMode::SigDigits:
        case PrecisionMode::DecimalPlaces: return digits_;
    }
    return 0.0;
}

std::string PrecisionSpec::label() const {
    switch (mode_) {
        case PrecisionMode::Native: return "native";
        case PrecisionMode::Extended: return "extended";
        case PrecisionMode::SigDigits: return std::to_string(digits_);
        case PrecisionMode::DecimalPlaces: return "p" + std::to_string(digits_);
    }
    return {};
}

double round_places(double x, int p, TieRule tie_rule) {
    require_finite(x, "round_places");
    if (p < kMinDecimalPlaces || p > kMaxDecimalPlaces)
        throw ParameterError("decimal places must be in [-15, 15], got " + std::to_string(p));
    return round_at(x, p, tie_rule);
}

double round_sig(double x, int n, TieRule tie_rule) {
    require_finite(x, "round_sig");
    if (n < kMinSigDigits || n > kMaxSigDigits)
        throw ParameterError("significant digits must be in [1, 17], got " + std::to_string(n));
    if (x == 0.0) return x;
    return round_at(x, n - 1 - decimal_exponent(x), tie_rule);
}

double apply(const RoundingPolicy& policy, double x) {
    switch (policy.spec.mode()) {
        case PrecisionMode::Native:
        case PrecisionMode::Extended:
            require_finite(x, "apply");
            return x;
        case PrecisionMode::SigDigits: return round_sig(x, policy.spec.digits(), policy.tie_rule);
        case PrecisionMode::DecimalPlaces:
            return round_places(x, policy.spec.digits(), policy.tie_rule);
    }
    return x;
}

TieRule parse_tie_rule(std::string_view text) {
    if (text == "half-away") return TieRule::HalfAwayFromZero;
    if (text == "half-even") return TieRule::HalfEven;
    throw ParameterError("unrecognized tie rule '" + std::string(text) +
                         "' (expected half-away or half-even)");
}

std::string_view tie_rule_name(TieRule rule) noexcept {
    return rule == TieRule::HalfAwayFromZero ? "half-away" : "half-even";
}

}  // namespace plab
