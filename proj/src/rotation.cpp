#include "plab/rotation.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "plab/errors.hpp"

namespace plab {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Exact quarter-turn index of an angle in [0, 360), or -1.
int quarter_turn(DoubleDouble angle_deg) noexcept {
    if (angle_deg.lo() != 0.0) return -1;
    const double a = angle_deg.hi();
    if (a == 0.0) return 0;
    if (a == 90.0) return 1;
    if (a == 180.0) return 2;
    if (a == 270.0) return 3;
    return -1;
}

// fmod is exact, so each part is reduced without error.
DoubleDouble reduce_degrees(double hi, double lo) {
    DoubleDouble a = DoubleDouble::from_sum(std::fmod(hi, 360.0), std::fmod(lo, 360.0));
    while (a.hi() < 0.0 || (a.hi() == 0.0 && a.lo() < 0.0)) a = a + DoubleDouble(360.0);
    while (!(a < DoubleDouble(360.0))) a = a - DoubleDouble(360.0);
    return a;
}

struct DDVec2 {
    DoubleDouble x;
    DoubleDouble y;
};

struct DDMat2 {
    DoubleDouble a11, a12, a21, a22;
};

DoubleDouble dd_det_drift(const DDMat2& m) {
    return m.a11 * m.a22 - m.a12 * m.a21 - DoubleDouble(1.0);
}

DDMat2 dd_rotation_matrix(double theta_deg) {
    DoubleDouble c, s;
    unit_vector_deg(reduce_degrees(theta_deg, 0.0), c, s);
    return {c, -s, s, c};
}

Vec2 to_native(const DDVec2& v) { return {v.x.to_native(), v.y.to_native()}; }

double native_norm(Vec2 v) noexcept { return std::sqrt(v.x * v.x + v.y * v.y); }

// Direction-dependent fields of a record; the norm is filled by the caller.
void fill_direction(TrajectoryRecord& rec, DoubleDouble exact_deg) {
    if (rec.v.x == 0.0 && rec.v.y == 0.0) {
        rec.phase_deg = std::nan("");
        rec.phase_error_deg = std::nan("");
        return;
    }
    rec.phase_deg = phase_deg(rec.v);
    rec.phase_error_deg = wrap_degrees((rec.phase_deg - exact_deg.hi()) - exact_deg.lo());
}

bool is_finite(Vec2 v) noexcept { return std::isfinite(v.x) && std::isfinite(v.y); }

bool is_finite(const Mat2& m) noexcept {
    return std::isfinite(m.a11) && std::isfinite(m.a12) && std::isfinite(m.a21) &&
           std::isfinite(m.a22);
}

bool should_emit(std::int64_t k, const RotationExperimentConfig& c) noexcept {
    return k % c.record_every == 0 || k == c.steps;
}

// Records and emits step k, reporting whether the run has diverged.
template <class Finish>
bool emit_step(const RotationExperimentConfig& config, const RecordSink& sink, std::int64_t k,
               bool force, Finish&& finish) {
    TrajectoryRecord rec;
    rec.k = k;
    finish(rec);
    rec.diverged = rec.diverged || std::fabs(rec.norm_drift) > kDivergedNormDrift ||
                   rec.norm == 0.0;
    if (force || should_emit(k, config)) {
        fill_direction(rec, exact_angle_deg(k, config.theta_deg, config.mode));
        sink(rec);
    }
    return rec.diverged;
}

Mat2 square_rounded(const Mat2& r, const RoundingPolicy& p) {
    return {apply(p, r.a11 * r.a11 + r.a12 * r.a21), apply(p, r.a11 * r.a12 + r.a12 * r.a22),
            apply(p, r.a21 * r.a11 + r.a22 * r.a21), apply(p, r.a21 * r.a12 + r.a22 * r.a22)};
}

DDVec2 dd_mul(const DDMat2& r, const DDVec2& v) {
    return {r.a11 * v.x + r.a12 * v.y, r.a21 * v.x + r.a22 * v.y};
}

DDMat2 dd_square(const DDMat2& r) {
    return {r.a11 * r.a11 + r.a12 * r.a21, r.a11 * r.a12 + r.a12 * r.a22,
            r.a21 * r.a11 + r.a22 * r.a21, r.a21 * r.a12 + r.a22 * r.a22};
}

void fill_dd_norm(TrajectoryRecord& rec, const DDVec2& v) {
    const DoubleDouble norm = dd_sqrt(v.x * v.x + v.y * v.y);
    rec.v = to_native(v);
    rec.norm = norm.to_native();
    rec.norm_drift = (norm - DoubleDouble(1.0)).to_native();
}

void fill_native_norm(TrajectoryRecord& rec, Vec2 v) {
    rec.v = v;
    rec.norm = native_norm(v);
    rec.norm_drift = rec.norm - 1.0;
}

RunOutcome run_stepwise_extended(const RotationExperimentConfig& config, const RecordSink& sink) {
    const DDMat2 r = dd_rotation_matrix(config.theta_deg);
    DDVec2 v{DoubleDouble(1.0), DoubleDouble(0.0)};
    RunOutcome out;
    for (std::int64_t k = 0;; ++k) {
        const bool diverged = emit_step(config, sink, k, false,
                                        [&](TrajectoryRecord& rec) { fill_dd_norm(rec, v); });
        out.diverged = out.diverged || diverged;
        out.final_k = k;
        if (k == config.steps) break;
        try {
            v = dd_mul(r, v);
        } catch (const RangeError&) {
            throw StepRangeError("rotation overflow", k + 1);
        }
    }
    return out;
}

RunOutcome run_squaring_extended(const RotationExperimentConfig& config, const RecordSink& sink) {
    DDMat2 r = dd_rotation_matrix(config.theta_deg);
    DDVec2 v{DoubleDouble(1.0), DoubleDouble(0.0)};
    RunOutcome out;
    for (std::int64_t k = 0;; ++k) {
        bool next_fails = false;
        DDVec2 next_v;
        DDMat2 next_r;
        if (k < config.steps) {
            try {
                next_v = dd_mul(r, v);
                next_r = dd_square(r);
            } catch (const RangeError&) {
                next_fails = true;
            }
        }
        const bool diverged = emit_step(config, sink, k, next_fails, [&](TrajectoryRecord& rec) {
            fill_dd_norm(rec, v);
            rec.det_drift = dd_det_drift(r).to_native();
            rec.diverged = next_fails;
        });
        out.diverged = out.diverged || diverged;
        out.final_k = k;
        if (next_fails) {
            out.terminated_early = true;
            break;
        }
        if (k == config.steps) break;
        v = next_v;
        r = next_r;
    }
    return out;
}

}  // namespace

double Mat2::det_drift() const noexcept {
    const TwoTerm p = detail::two_prod_unchecked(a11, a22);
    const TwoTerm q = detail::two_prod_unchecked(a12, a21);
    const DoubleDouble det = detail::add_unchecked(DoubleDouble::from_normalized(p.value, p.error),
                                                   -DoubleDouble::from_normalized(q.value, q.error));
    return detail::add_unchecked(det, DoubleDouble(-1.0)).to_native();
}

double Mat2::orthogonality_residual() const noexcept {
    // R^T R = [[a11^2 + a21^2, a11 a12 + a21 a22], [., a12^2 + a22^2]]
    const double d11 = a11 * a11 + a21 * a21 - 1.0;
    const double d12 = a11 * a12 + a21 * a22;
    const double d22 = a12 * a12 + a22 * a22 - 1.0;
    return std::fmax(std::fabs(d11), std::fmax(std::fabs(d12), std::fabs(d22)));
}

void RotationExperimentConfig::validate() const {
    if (!std::isfinite(theta_deg)) throw ParameterError("theta_deg must be finite");
    if (steps < 0) throw ParameterError("steps must be >= 0");
    if (record_every < 1) throw ParameterError("record_every must be >= 1");
    const std::int64_t cap = mode == RotationMode::Stepwise ? kMaxStepwiseSteps : kMaxSquaringSteps;
    if (steps > cap)
        throw ParameterError("steps must be <= " + std::to_string(cap) + " in " +
                             (mode == RotationMode::Stepwise ? "stepwise" : "squaring") + " mode");
}

Mat2 rotation_matrix(double theta_deg, const RoundingPolicy& policy) {
    if (!std::isfinite(theta_deg)) throw DomainError("rotation_matrix: non-finite angle");
    const double quarter = std::fmod(theta_deg, 360.0);
    if (std::fmod(quarter, 90.0) == 0.0) {
        const auto q = static_cast<int>((quarter < 0.0 ? quarter + 360.0 : quarter) / 90.0) & 3;
        static constexpr double kCos[4] = {1.0, 0.0, -1.0, 0.0};
        static constexpr double kSin[4] = {0.0, 1.0, 0.0, -1.0};
        const double c = kCos[q];
        const double s = kSin[q];
        return {c, s == 0.0 ? 0.0 : -s, s, c};
    }
    const double rad = theta_deg * kDegToRad;
    const double c = apply(policy, std::cos(rad));
    const double s = apply(policy, std::sin(rad));
    return {c, -s, s, c};
}

Vec2 step_rotate(const RotationExperimentConfig& config, const Mat2& r, Vec2 v,
                 std::int64_t step) {
    const double x = r.a11 * v.x + r.a12 * v.y;
    const double y = r.a21 * v.x + r.a22 * v.y;
    if (!std::isfinite(x) || !std::isfinite(y)) throw StepRangeError("rotation overflow", step);
    return {apply(config.policy, x), apply(config.policy, y)};
}

RunOutcome run_stepwise(const RotationExperimentConfig& config, const RecordSink& sink) {
    config.validate();
    if (config.mode != RotationMode::Stepwise)
        throw ParameterError("run_stepwise requires stepwise mode");
    if (config.policy.spec.mode() == PrecisionMode::Extended)
        return run_stepwise_extended(config, sink);

    const Mat2 r = rotation_matrix(config.theta_deg, config.policy);
    Vec2 v{1.0, 0.0};
    RunOutcome out;
    for (std::int64_t k = 0;; ++k) {
        const bool diverged = emit_step(config, sink, k, false,
                                        [&](TrajectoryRecord& rec) { fill_native_norm(rec, v); });
        out.diverged = out.diverged || diverged;
        out.final_k = k;
        if (k == config.steps) break;
        v = step_rotate(config, r, v, k + 1);
    }
    return out;
}

RunOutcome run_squaring(const RotationExperimentConfig& config, const RecordSink& sink) {
    config.validate();
    if (config.mode != RotationMode::Squaring)
        throw ParameterError("run_squaring requires squaring mode");
    if (config.policy.spec.mode() == PrecisionMode::Extended)
        return run_squaring_extended(config, sink);

    Mat2 r = rotation_matrix(config.theta_deg, config.policy);
    Vec2 v{1.0, 0.0};
    RunOutcome out;
    for (std::int64_t k = 0;; ++k) {
        bool next_fails = false;
        Vec2 next_v;
        Mat2 next_r;
        if (k < config.steps) {
            try {
                next_v = step_rotate(config, r, v, k + 1);
                next_r = square_rounded(r, config.policy);
                next_fails = !is_finite(next_r);
            } catch (const RangeError&) {
                next_fails = true;
            } catch (const DomainError&) {
                next_fails = true;
            }
        }
        const bool diverged = emit_step(config, sink, k, next_fails, [&](TrajectoryRecord& rec) {
            fill_native_norm(rec, v);
            rec.det_drift = r.det_drift();
            rec.diverged = next_fails || !std::isfinite(rec.norm);
        });
        out.diverged = out.diverged || diverged;
        out.final_k = k;
        if (next_fails) {
            out.terminated_early = true;
            break;
        }
        if (k == config.steps) break;
        v = next_v;
        r = next_r;
    }
    return out;
}

RunOutcome run_rotation(const RotationExperimentConfig& config, const RecordSink& sink) {
    return config.mode == RotationMode::Stepwise ? run_stepwise(config, sink)
                                                 : run_squaring(config, sink);
}

std::vector<TrajectoryRecord> run_rotation(const RotationExperimentConfig& config) {
    std::vector<TrajectoryRecord> records;
    run_rotation(config, [&](const TrajectoryRecord& r) { records.push_back(r); });
    return records;
}

DoubleDouble exact_angle_deg(std::int64_t k, double theta_deg, RotationMode mode) {
    if (k < 0) throw ParameterError("exact_angle_deg: k must be >= 0");
    if (!std::isfinite(theta_deg)) throw DomainError("exact_angle_deg: non-finite angle");
    if (mode == RotationMode::Stepwise) {
        const TwoTerm p = detail::two_prod_unchecked(static_cast<double>(k), theta_deg);
        return reduce_degrees(p.value, p.error);
    }
    if (k > kMaxSquaringSteps) throw ParameterError("exact_angle_deg: squaring k must be <= 60");
    // theta * 2^k is exact; fmod keeps it exact after reduction.
    const double doubled = std::fmod(std::ldexp(theta_deg, static_cast<int>(k)), 360.0);
    const TwoTerm s = detail::two_sum_unchecked(doubled, -theta_deg);
    return reduce_degrees(s.value, s.error);
}

void unit_vector_deg(DoubleDouble angle_deg, DoubleDouble& c, DoubleDouble& s) {
    switch (quarter_turn(angle_deg)) {
        case 0: c = 1.0; s = 0.0; return;
        case 1: c = 0.0; s = 1.0; return;
        case 2: c = -1.0; s = 0.0; return;
        case 3: c = 0.0; s = -1.0; return;
        default: break;
    }
    const DDSinCos sc = dd_sincos(angle_deg * dd_const::deg_to_rad);
    c = sc.cos;
    s = sc.sin;
}

Vec2 unit_vector_deg(DoubleDouble angle_deg) {
    DoubleDouble c, s;
    unit_vector_deg(angle_deg, c, s);
    return {c.to_native(), s.to_native()};
}

Vec2 exact_state(std::int64_t k, double theta_deg, RotationMode mode) {
    return unit_vector_deg(exact_angle_deg(k, theta_deg, mode));
}

double phase_deg(Vec2 v) {
    if (v.x == 0.0 && v.y == 0.0) throw DomainError("phase of the zero vector is undefined");
    if (v.y == 0.0) return v.x > 0.0 ? 0.0 : 180.0;
    if (v.x == 0.0) return v.y > 0.0 ? 90.0 : 270.0;
    double a = std::atan2(v.y, v.x) * kRadToDeg;
    if (a < 0.0) a += 360.0;
    if (a >= 360.0) a -= 360.0;
    return a;
}

double wrap_degrees(double d) {
    d = std::fmod(d, 360.0);
    if (d > 180.0) d -= 360.0;
    if (d <= -180.0) d += 360.0;
    return d;
}

DriftMetrics drift_metrics(Vec2 v, std::int64_t k, double theta_deg, RotationMode mode) {
    if (!is_finite(v)) throw DomainError("drift_metrics: non-finite vector");
    const double phase = phase_deg(v);
    const DoubleDouble exact = exact_angle_deg(k, theta_deg, mode);
    return {native_norm(v) - 1.0, wrap_degrees((phase - exact.hi()) - exact.lo())};
}

}  // namespace plab
