#pragma once

// Iterated plane rotations under injected decimal rounding.
//
// Stepwise mode iterates v_{k+1} = R v_k with a fixed matrix. Squaring mode
// runs the cascade
//     R_0 = R,  v_{k+1} = R_k v_k,  R_{k+1} = R_k R_k
// which reaches the rotation angle theta * (2^k - 1) after k steps.
//
// Every scalar a step produces (each dot product, each matrix entry) is
// computed in native arithmetic and then passed once through the rounding
// policy. Extended-policy runs carry double-double state instead.

#include <cstdint>
#include <functional>
#include <vector>

#include "plab/extended.hpp"
#include "plab/precision.hpp"

namespace plab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

struct Mat2 {
    double a11 = 1.0;
    double a12 = 0.0;
    double a21 = 0.0;
    double a22 = 1.0;

    static constexpr Mat2 identity() noexcept { return {}; }

    double det() const noexcept { return a11 * a22 - a12 * a21; }
    // det - 1 evaluated with exact products.
    double det_drift() const noexcept;
    // max |(R^T R - I)_ij|
    double orthogonality_residual() const noexcept;

    friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

enum class RotationMode { Stepwise, Squaring };

inline constexpr std::int64_t kMaxStepwiseSteps = 1'000'000'000;
inline constexpr std::int64_t kMaxSquaringSteps = 60;

// |norm_drift| above this marks a run as collapsed or blown up.
inline constexpr double kDivergedNormDrift = 0.5;

struct RotationExperimentConfig {
    double theta_deg = 5.0;
    std::int64_t steps = 288;
    RoundingPolicy policy;
    RotationMode mode = RotationMode::Stepwise;
    std::int64_t record_every = 1;

    // Throws ParameterError when an invariant is violated.
    void validate() const;
};

struct TrajectoryRecord {
    std::int64_t k = 0;
    Vec2 v;
    double norm = 1.0;
    double norm_drift = 0.0;
    double phase_deg = 0.0;        // [0, 360)
    double phase_error_deg = 0.0;  // (-180, 180], against the exact angle
    double det_drift = 0.0;        // squaring mode: det(R_k) - 1; 0 in stepwise mode
    bool diverged = false;
};

struct RunOutcome {
    std::int64_t final_k = 0;
    bool diverged = false;
    // The run stopped before config.steps because the next state was not finite.
    bool terminated_early = false;
};

using RecordSink = std::function<void(const TrajectoryRecord&)>;

// [[cos, -sin], [sin, cos]] of theta_deg with every entry rounded by the
// policy. Multiples of 90 degrees give entries exactly in {-1, 0, 1}.
Mat2 rotation_matrix(double theta_deg, const RoundingPolicy& policy);

// apply(policy, R v) componentwise. Throws StepRangeError (tagged with
// `step`) when a component overflows.
Vec2 step_rotate(const RotationExperimentConfig& config, const Mat2& r, Vec2 v,
                 std::int64_t step = 0);

// Streams records for k = 0, record_every, 2*record_every, ... and always the
// final step. Stepwise runs propagate StepRangeError; squaring runs stop at
// the last finite state and flag it as diverged.
RunOutcome run_stepwise(const RotationExperimentConfig& config, const RecordSink& sink);
RunOutcome run_squaring(const RotationExperimentConfig& config, const RecordSink& sink);

// Dispatches on config.mode.
RunOutcome run_rotation(const RotationExperimentConfig& config, const RecordSink& sink);
std::vector<TrajectoryRecord> run_rotation(const RotationExperimentConfig& config);

// Exact rotation angle after k steps, reduced into [0, 360): k*theta in
// stepwise mode, theta*(2^k - 1) in squaring mode. Products are formed
// exactly, so the only rounding is the final double-double sum.
DoubleDouble exact_angle_deg(std::int64_t k, double theta_deg,
                             RotationMode mode = RotationMode::Stepwise);

// (cos, sin) of an exact angle in degrees, with quarter turns exact.
Vec2 unit_vector_deg(DoubleDouble angle_deg);
void unit_vector_deg(DoubleDouble angle_deg, DoubleDouble& c, DoubleDouble& s);

// (cos k*theta, sin k*theta) to within 1 ulp per component.
Vec2 exact_state(std::int64_t k, double theta_deg, RotationMode mode = RotationMode::Stepwise);

struct DriftMetrics {
    double norm_drift = 0.0;
    double phase_error_deg = 0.0;
};

// Throws DomainError for v = (0, 0), whose direction is undefined.
DriftMetrics drift_metrics(Vec2 v, std::int64_t k, double theta_deg,
                           RotationMode mode = RotationMode::Stepwise);

// atan2 direction in degrees within [0, 360); axis directions are exact.
double phase_deg(Vec2 v);

// Signed a - b in degrees, wrapped into (-180, 180].
double wrap_degrees(double a_minus_b);

}  // namespace plab
