#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "decimal_oracle.hpp"
#include "dyadic.hpp"
#include "plab/errors.hpp"
#include "plab/parallel.hpp"
#include "plab/rotation.hpp"

using namespace plab;

namespace {

RoundingPolicy sig(int n) { return {PrecisionSpec::sig_digits(n)}; }
RoundingPolicy native() { return {PrecisionSpec::native()}; }
RoundingPolicy extended() { return {PrecisionSpec::extended()}; }

RotationExperimentConfig config(double theta, std::int64_t steps, RoundingPolicy policy,
                                RotationMode mode = RotationMode::Stepwise) {
    RotationExperimentConfig c;
    c.theta_deg = theta;
    c.steps = steps;
    c.policy = policy;
    c.mode = mode;
    return c;
}

TrajectoryRecord final_record(const RotationExperimentConfig& c) {
    TrajectoryRecord last;
    run_rotation(c, [&](const TrajectoryRecord& r) { last = r; });
    return last;
}

double ulp(double x) { return std::fabs(std::nextafter(x, INFINITY) - x); }

}  // namespace

TEST(RotationMatrix, Examples) {
    for (const RoundingPolicy p : {native(), sig(1), sig(7), extended()}) {
        EXPECT_EQ(rotation_matrix(90.0, p), (Mat2{0.0, -1.0, 1.0, 0.0}));
        EXPECT_EQ(rotation_matrix(0.0, p), Mat2::identity());
        EXPECT_EQ(rotation_matrix(180.0, p), (Mat2{-1.0, 0.0, 0.0, -1.0}));
        EXPECT_EQ(rotation_matrix(-90.0, p), (Mat2{0.0, 1.0, -1.0, 0.0}));
    }
    const Mat2 r7 = rotation_matrix(5.0, sig(7));
    EXPECT_EQ(r7.a11, 0.9961947);
    EXPECT_EQ(r7.a21, 0.08715574);
    EXPECT_EQ(r7.a12, -0.08715574);
    // Independent check: the digit-string oracle on native trig values.
    const double rad = 5.0 * (M_PI / 180.0);
    EXPECT_EQ(r7.a11, plab::testing::oracle_round_sig(std::cos(rad), 7, TieRule::HalfAwayFromZero));
    EXPECT_EQ(r7.a21, plab::testing::oracle_round_sig(std::sin(rad), 7, TieRule::HalfAwayFromZero));
}

TEST(RotationMatrix, NativeResidualsSmall) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> theta(-720.0, 720.0);
    for (int i = 0; i < 10000; ++i) {
        const Mat2 r = rotation_matrix(theta(rng), native());
        ASSERT_LE(std::fabs(r.det_drift()), 4e-16);
        ASSERT_LE(r.orthogonality_residual(), 4e-16);
    }
}

TEST(StepRotate, Examples) {
    const auto c = config(5.0, 1, native());
    EXPECT_EQ(step_rotate(c, Mat2::identity(), {1.0, 0.0}), (Vec2{1.0, 0.0}));
    EXPECT_EQ(step_rotate(c, rotation_matrix(90.0, native()), {1.0, 0.0}), (Vec2{0.0, 1.0}));
    const Vec2 v = step_rotate(c, rotation_matrix(5.0, native()), {1.0, 0.0});
    const double rad = 5.0 * (M_PI / 180.0);
    EXPECT_LE(std::fabs(v.x - std::cos(rad)), ulp(v.x));
    EXPECT_LE(std::fabs(v.y - std::sin(rad)), ulp(v.y));
    const double big = 1.5e308;
    EXPECT_THROW(step_rotate(c, Mat2{1.0, 1.0, 1.0, 1.0}, {big, big}, 7), StepRangeError);
    try {
        step_rotate(c, Mat2{1.0, 1.0, 1.0, 1.0}, {big, big}, 7);
    } catch (const StepRangeError& e) {
        EXPECT_EQ(e.step(), 7);
    }
}

TEST(RunStepwise, Examples) {
    const auto quarter = final_record(config(90.0, 4, native()));
    EXPECT_EQ(quarter.v, (Vec2{1.0, 0.0}));
    EXPECT_EQ(quarter.norm_drift, 0.0);

    const auto native288 = final_record(config(5.0, 288, native()));
    EXPECT_EQ(native288.k, 288);
    EXPECT_GT(native288.norm_drift, 5.77e-15 / 3.0);
    EXPECT_LT(native288.norm_drift, 5.77e-15 * 3.0);
}

TEST(RunStepwise, Validation) {
    EXPECT_THROW(config(5.0, -1, native()).validate(), ParameterError);
    auto c = config(5.0, 10, native());
    c.record_every = 0;
    EXPECT_THROW(c.validate(), ParameterError);
    EXPECT_THROW(config(std::nan(""), 10, native()).validate(), ParameterError);
    EXPECT_THROW(config(5.0, 61, native(), RotationMode::Squaring).validate(), ParameterError);
    EXPECT_THROW(config(5.0, kMaxStepwiseSteps + 1, native()).validate(), ParameterError);
}

TEST(RunStepwise, RecordStride) {
    auto c = config(5.0, 25, native());
    c.record_every = 10;
    std::vector<std::int64_t> ks;
    run_rotation(c, [&](const TrajectoryRecord& r) { ks.push_back(r.k); });
    EXPECT_EQ(ks, (std::vector<std::int64_t>{0, 10, 20, 25}));
}

TEST(ExactState, Examples) {
    EXPECT_EQ(exact_state(72, 5.0), (Vec2{1.0, 0.0}));
    EXPECT_EQ(exact_state(0, 37.3), (Vec2{1.0, 0.0}));
    const Vec2 v = exact_state(9, 5.0);
    const double h = std::sqrt(2.0) / 2.0;
    EXPECT_LE(std::fabs(v.x - h), ulp(h));
    EXPECT_LE(std::fabs(v.y - h), ulp(h));
}

TEST(DriftMetrics, Examples) {
    auto m = drift_metrics({1.0, 0.0}, 0, 5.0);
    EXPECT_EQ(m.norm_drift, 0.0);
    EXPECT_EQ(m.phase_error_deg, 0.0);

    m = drift_metrics({0.5, 0.0}, 0, 5.0);
    EXPECT_EQ(m.norm_drift, -0.5);
    EXPECT_EQ(m.phase_error_deg, 0.0);

    // 1.001 is not a binary value: its norm minus one is exact but sits
    // 1.1e-16 from the double 0.001, i.e. within one ulp at the norm's scale.
    m = drift_metrics({0.0, 1.001}, 18, 5.0);
    EXPECT_LE(std::fabs(m.norm_drift - 0.001), ulp(1.001));
    EXPECT_EQ(m.phase_error_deg, 0.0);

    EXPECT_THROW(drift_metrics({0.0, 0.0}, 1, 5.0), DomainError);
}

TEST(ExactAngle, MatchesBigIntegerArithmetic) {
    using plab::testing::Dyadic;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> theta(-400.0, 400.0);
    const Dyadic full = Dyadic::from(360.0);
    for (int i = 0; i < 2000; ++i) {
        const double t = theta(rng);
        for (const auto mode : {RotationMode::Stepwise, RotationMode::Squaring}) {
            const std::int64_t k = mode == RotationMode::Stepwise ? (i * 7919) % 100000 : i % 61;
            Dyadic exact = Dyadic::from(t);
            if (mode == RotationMode::Stepwise) {
                exact = exact * Dyadic{plab::testing::BigInt(k), 0};
            } else {
                exact = exact * Dyadic{(plab::testing::BigInt(1) << k) - 1, 0};
            }
            // Reduce into [0, 360) with the exact integer quotient.
            const double approx_turns = std::floor(exact.approx() / 360.0);
            Dyadic reduced = exact - full * Dyadic::from(approx_turns);
            while (reduced.sign() < 0) reduced = reduced + full;
            while (full <= reduced) reduced = reduced - full;

            const DoubleDouble got = exact_angle_deg(k, t, mode);
            EXPECT_GE(got.hi(), 0.0);
            EXPECT_LT(got.hi(), 360.0);
            ASSERT_TRUE((Dyadic::from(got) - reduced).abs() <= Dyadic::pow2(-95))
                << t << " k=" << k;
        }
    }
}

TEST(RotationProperties, ExactSubgroup) {
    for (const double theta : {0.0, 90.0, 180.0, 270.0, -90.0, 450.0}) {
        for (const RoundingPolicy p : {native(), extended(), sig(1), sig(7), sig(12),
                                       RoundingPolicy{PrecisionSpec::decimal_places(3)}}) {
            for (const auto mode : {RotationMode::Stepwise, RotationMode::Squaring}) {
                const auto c = config(theta, mode == RotationMode::Stepwise ? 10000 : 60, p, mode);
                run_rotation(c, [&](const TrajectoryRecord& r) {
                    ASSERT_EQ(r.norm_drift, 0.0) << theta << " k=" << r.k;
                    ASSERT_EQ(r.phase_error_deg, 0.0) << theta << " k=" << r.k;
                    ASSERT_EQ(r.det_drift, 0.0);
                    ASSERT_FALSE(r.diverged);
                });
            }
        }
    }
}

TEST(RotationProperties, StepwiseOracleEquivalence) {
    run_rotation(config(5.0, 10000, native()), [](const TrajectoryRecord& r) {
        const double exact = std::fmod(5.0 * static_cast<double>(r.k), 360.0);
        ASSERT_LT(std::fabs(wrap_degrees(r.phase_deg - exact)), 1e-10) << r.k;
        ASSERT_LT(std::fabs(r.phase_error_deg), 1e-10) << r.k;
    });
}

TEST(RotationProperties, FullCircleClosure) {
    const auto r = final_record(config(5.0, 72, native()));
    EXPECT_LT(std::hypot(r.v.x - 1.0, r.v.y), 1e-13);
}

TEST(RunSquaring, AngleRecurrence) {
    std::vector<TrajectoryRecord> recs = run_rotation(config(5.0, 3, native(), RotationMode::Squaring));
    ASSERT_EQ(recs.size(), 4u);
    EXPECT_NEAR(recs[1].phase_deg, 5.0, 1e-12);
    EXPECT_NEAR(recs[2].phase_deg, 15.0, 1e-12);
    EXPECT_NEAR(recs[3].phase_deg, 35.0, 1e-12);
}

TEST(RunSquaring, NativeOracleUpToTwenty) {
    run_rotation(config(5.0, 20, native(), RotationMode::Squaring), [](const TrajectoryRecord& r) {
        const double exact = std::fmod(5.0 * (std::ldexp(1.0, static_cast<int>(r.k)) - 1.0), 360.0);
        ASSERT_LT(std::fabs(wrap_degrees(r.phase_deg - exact)), 1e-6) << r.k;
    });
}

TEST(RunSquaring, SevenDigitsDriftsMoreThanTwelve) {
    const auto r7 = run_rotation(config(5.0, 40, sig(7), RotationMode::Squaring));
    const auto r12 = run_rotation(config(5.0, 40, sig(12), RotationMode::Squaring));
    ASSERT_EQ(r12.back().k, 40);
    EXPECT_GT(std::fabs(r12.back().norm_drift), std::fabs(r12[10].norm_drift));
    // Seven digits blow up before k = 40; the flagged last record is infinite.
    EXPECT_TRUE(r7.back().diverged);
    EXPECT_LT(r7.back().k, 40);
    EXPECT_GT(std::fabs(r7.back().norm_drift), std::fabs(r12.back().norm_drift));
    // On the common finite range the 7-digit drift dominates from k = 2 on.
    for (std::size_t k = 2; k + 1 < r7.size(); ++k)
        EXPECT_GT(std::fabs(r7[k].norm_drift), std::fabs(r12[k].norm_drift)) << k;
}

TEST(RunSquaring, OverflowTerminatesWithFlaggedRecord) {
    const auto c = config(5.0, 60, sig(7), RotationMode::Squaring);
    std::vector<TrajectoryRecord> recs;
    const RunOutcome out = run_rotation(c, [&](const TrajectoryRecord& r) { recs.push_back(r); });
    EXPECT_TRUE(out.diverged);
    EXPECT_TRUE(out.terminated_early);
    EXPECT_LT(out.final_k, 60);
    EXPECT_TRUE(recs.back().diverged);
    EXPECT_EQ(recs.back().k, out.final_k);
}

TEST(RotationProperties, Deterministic) {
    for (const RoundingPolicy p : {native(), sig(7), extended()}) {
        const auto a = run_rotation(config(3.7, 2000, p));
        const auto b = run_rotation(config(3.7, 2000, p));
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            ASSERT_EQ(a[i].v, b[i].v);
            ASSERT_EQ(a[i].norm_drift, b[i].norm_drift);
        }
    }
}

TEST(RotationProperties, ExtendedMatchesOracleAt288) {
    const auto r = final_record(config(5.0, 288, extended()));
    EXPECT_LT(std::fabs(r.norm_drift), 1e-25);
    EXPECT_LT(std::fabs(r.phase_error_deg), 1e-12);
}

TEST(RotationProperties, PrecisionSweepReport) {
    // Informational: the drift ladder over significant-digit levels.
    for (const RoundingPolicy p : {sig(7), sig(9), sig(11), sig(12), sig(13), sig(15), native(), extended()}) {
        const auto r = final_record(config(5.0, 288, p));
        std::printf("  288 steps %-9s norm_drift=% .3e\n", p.spec.label().c_str(), r.norm_drift);
    }
    const auto r12 = final_record(config(5.0, 288, sig(12)));
    EXPECT_GT(r12.norm_drift, 8e-12);
    EXPECT_LT(r12.norm_drift, 8e-10);
}

TEST(RotationProperties, RandomWalkScalesWithDigits) {
    // 30 angles in (1, 89) degrees, 10^6 steps each, at 7 and 12 digits.
    std::mt19937_64 rng(20240901);
    std::uniform_real_distribution<double> theta(1.0, 89.0);
    std::vector<double> thetas(30);
    for (double& t : thetas) t = theta(rng);

    const auto mean_drift = [&](int digits) {
        const auto drifts = parallel_map(thetas.size(), [&](std::size_t i) {
            auto c = config(thetas[i], 1'000'000, sig(digits));
            c.record_every = 1'000'000;
            return std::fabs(final_record(c).norm_drift);
        });
        double sum = 0.0;
        for (double d : drifts) sum += d;
        return sum / static_cast<double>(drifts.size());
    };
    const double d7 = mean_drift(7);
    const double d12 = mean_drift(12);
    std::printf("  mean |drift| at 1e6 steps: 7 digits %.3e, 12 digits %.3e, ratio %.3e\n", d7, d12,
                d7 / d12);
    EXPECT_GE(d7 / d12, 1e3);
    EXPECT_LE(d7 / d12, 1e7);
}
