#pragma once

// Decimal rounding used to simulate reduced-precision arithmetic.
//
// A rounded value is stored as the binary64 number nearest to the decimal
// result, exactly as a spreadsheet ROUND cell would store it.

#include <string>
#include <string_view>

namespace plab {

enum class PrecisionMode { Native, Extended, SigDigits, DecimalPlaces };

enum class TieRule { HalfAwayFromZero, HalfEven };

inline constexpr int kMinSigDigits = 1;
inline constexpr int kMaxSigDigits = 17;
inline constexpr int kMinDecimalPlaces = -15;
inline constexpr int kMaxDecimalPlaces = 15;

class PrecisionSpec {
public:
    // Native passthrough.
    constexpr PrecisionSpec() noexcept = default;

    static constexpr PrecisionSpec native() noexcept { return {}; }
    static constexpr PrecisionSpec extended() noexcept {
        return PrecisionSpec(PrecisionMode::Extended, 0);
    }
    // Throws ParameterError unless 1 <= n <= 17.
    static PrecisionSpec sig_digits(int n);
    // Throws ParameterError unless -15 <= p <= 15.
    static PrecisionSpec decimal_places(int p);

    // Accepts "native", "extended", an integer n (significant digits) or
    // "p<k>" (k decimal places, k may be negative). Throws ParameterError.
    static PrecisionSpec parse(std::string_view text);

    constexpr PrecisionMode mode() const noexcept { return mode_; }
    // Digit parameter; zero for Native and Extended.
    constexpr int digits() const noexcept { return digits_; }

    // Ordering key for "more precise than". SigDigits n ranks at n and
    // DecimalPlaces p at p (nominal for unit-scale values); Native ranks
    // above every SigDigits level because those round native results, and
    // Extended ranks at log10(2^106).
    double nominal_digits() const noexcept;

    // Inverse of parse().
    std::string label() const;

    friend constexpr bool operator==(const PrecisionSpec&, const PrecisionSpec&) = default;

private:
    constexpr PrecisionSpec(PrecisionMode mode, int digits) noexcept
        : mode_(mode), digits_(digits) {}

    PrecisionMode mode_ = PrecisionMode::Native;
    int digits_ = 0;
};

struct RoundingPolicy {
    PrecisionSpec spec;
    TieRule tie_rule = TieRule::HalfAwayFromZero;

    friend constexpr bool operator==(const RoundingPolicy&, const RoundingPolicy&) = default;
};

// x rounded at the 10^-p place. Negative p rounds left of the decimal point:
// round_places(1234, -2) == 1200.
// Throws DomainError for non-finite x, ParameterError for p outside [-15, 15].
double round_places(double x, int p, TieRule tie_rule = TieRule::HalfAwayFromZero);

// x rounded to n significant decimal digits; zero maps to itself.
// Throws DomainError for non-finite x, ParameterError for n outside [1, 17].
double round_sig(double x, int n, TieRule tie_rule = TieRule::HalfAwayFromZero);

// Native and Extended pass x through unchanged; the digit modes delegate to
// round_sig / round_places. Throws as the delegate does.
double apply(const RoundingPolicy& policy, double x);

// floor(log10|x|) computed exactly for finite non-zero x.
int decimal_exponent(double x);

TieRule parse_tie_rule(std::string_view text);
std::string_view tie_rule_name(TieRule rule) noexcept;

}  // namespace plab
