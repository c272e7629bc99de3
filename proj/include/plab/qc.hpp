#pragma once

// Precision quality control: run one computation at several precision
// levels and measure how many significant digits the runs share.

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "plab/lorenz.hpp"
#include "plab/precision.hpp"
#include "plab/rotation.hpp"

namespace plab {

inline constexpr double kMaxAgreedDigits = 17.0;
inline constexpr double kAgreementFloor = 1e-300;

// -log10(|a - b| / max(|a|, |b|, 1e-300)), clamped to [0, 17]. Bit-equal
// inputs give 17. Throws DomainError for non-finite input.
double agreed_digits(double a, double b);

// Same metric on the Euclidean norm of a state difference.
double agreed_digits(const LorenzState& a, const LorenzState& b);

struct AgreementSample {
    double at = 0.0;  // step index or time
    double digits = 0.0;
};

struct AgreementSeries {
    std::vector<AgreementSample> samples;
    // (higher precision, lower precision)
    std::pair<PrecisionSpec, PrecisionSpec> runs_compared;
};

enum class RotationObservable { Norm, Phase, X, Y };
enum class LorenzObservable { X, Y, Z };

RotationObservable parse_rotation_observable(std::string_view name);
LorenzObservable parse_lorenz_observable(std::string_view name);

enum class Pairing { Adjacent, AllPairs };

// Runs the template once per spec (only the policy's spec is replaced),
// orders the runs by nominal precision, highest first, and compares
// neighbours (or every pair). A run that diverged early is compared on the
// common prefix of the sampling grid. Throws ConfigError for fewer than two
// specs or grids that disagree inside the common prefix.
std::vector<AgreementSeries> compare_runs(const RotationExperimentConfig& experiment,
                                          std::span<const PrecisionSpec> specs,
                                          RotationObservable observable,
                                          Pairing pairing = Pairing::Adjacent);

std::vector<AgreementSeries> compare_runs(const LorenzRunConfig& experiment,
                                          std::span<const PrecisionSpec> specs,
                                          LorenzObservable observable,
                                          Pairing pairing = Pairing::Adjacent);

// Agreed digits linearly interpolated at `at`, read as the number of
// significant digits that can be trusted there. Throws ParameterError when
// `at` lies outside the series.
double trust_estimate(const AgreementSeries& series, double at);

}  // namespace plab
