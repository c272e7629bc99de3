#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "plab/errors.hpp"
#include "plab/lorenz.hpp"
#include "plab/parallel.hpp"

using namespace plab;

namespace {

RoundingPolicy sig(int n) { return {PrecisionSpec::sig_digits(n)}; }

double distance(const LorenzState& a, const LorenzState& b) {
    return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

LorenzState integrate(LorenzState s, double h, int steps, const RoundingPolicy& policy = {}) {
    LorenzIntegrator integ(s, {}, h, policy);
    for (int i = 0; i < steps; ++i) integ.step();
    return integ.state();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST(LorenzRhs, Examples) {
    const LorenzParams p;
    const auto o = lorenz_rhs({0.0, 0.0, 0.0}, p);
    EXPECT_EQ(o.dx, 0.0);
    EXPECT_EQ(o.dy, 0.0);
    EXPECT_EQ(o.dz, 0.0);

    const auto d = lorenz_rhs({1.0, 1.0, 1.0}, p);
    EXPECT_EQ(d.dx, 0.0);
    EXPECT_EQ(d.dy, 26.0);
    EXPECT_NEAR(d.dz, 1.0 - 8.0 / 3.0, 1e-15);

    const double c = std::sqrt(p.beta * (p.rho - 1.0));
    const auto f = lorenz_rhs({c, c, p.rho - 1.0}, p);
    EXPECT_LT(std::fabs(f.dx), 1e-12);
    EXPECT_LT(std::fabs(f.dy), 1e-12);
    EXPECT_LT(std::fabs(f.dz), 1e-12);
}

TEST(Rk4Step, OriginFixedPointEveryPolicy) {
    for (const RoundingPolicy p :
         {RoundingPolicy{}, RoundingPolicy{PrecisionSpec::extended()}, sig(1), sig(3), sig(7),
          sig(17), RoundingPolicy{PrecisionSpec::decimal_places(2)}}) {
        EXPECT_EQ(rk4_step({0.0, 0.0, 0.0, 0.0}, {}, 0.01, p), (LorenzState{0.0, 0.0, 0.0, 0.01}));
        LorenzIntegrator integ({0.0, 0.0, 0.0, 0.0}, {}, 0.01, p);
        for (int i = 0; i < 1000; ++i) integ.step();
        EXPECT_EQ(integ.state(), (LorenzState{0.0, 0.0, 0.0, 10.0}));
    }
}

TEST(Rk4Step, EndOfStepRounding) {
    const LorenzState s0{1.0, 1.0, 1.0, 0.0};
    const LorenzState native = rk4_step(s0, {}, 0.01, {});
    const LorenzState r3 = rk4_step(s0, {}, 0.01, sig(3));
    EXPECT_EQ(r3.x, round_sig(native.x, 3));
    EXPECT_EQ(r3.y, round_sig(native.y, 3));
    EXPECT_EQ(r3.z, round_sig(native.z, 3));
    EXPECT_EQ(r3.t, 0.01);
}

TEST(Rk4Step, Errors) {
    EXPECT_THROW(rk4_step({1.0, 1.0, 1.0, 0.0}, {}, 0.0, {}), ParameterError);
    EXPECT_THROW(rk4_step({1.0, 1.0, 1.0, 0.0}, {}, -0.1, {}), ParameterError);
    EXPECT_THROW(rk4_step({1e200, 1e200, 1e200, 0.0}, {}, 0.01, {}), DivergenceError);
    LorenzParams bad;
    bad.rho = std::nan("");
    EXPECT_THROW(bad.validate(), ParameterError);
}

TEST(Rk4Step, LocalErrorIsFifthOrder) {
    const LorenzState s0{1.0, 1.0, 1.0, 0.0};
    const RoundingPolicy ext{PrecisionSpec::extended()};
    const auto local_error = [&](double h) {
        const LorenzState one = rk4_step(s0, {}, h, {});
        const LorenzState ref = integrate(s0, h / 100.0, 100, ext);
        return distance(one, ref);
    };
    const double ratio = local_error(0.02) / local_error(0.01);
    std::printf("  local error ratio %.3f\n", ratio);
    EXPECT_GE(ratio, 20.0);
    EXPECT_LE(ratio, 44.0);
}

// Convergence factor per halving of h for the error at t = 1 against a
// double-double run at h/100.
std::pair<double, double> global_order_factors(const LorenzState& s0) {
    const RoundingPolicy ext{PrecisionSpec::extended()};
    const LorenzState ref = integrate(s0, 0.005 / 100.0, 20000, ext);
    const double e1 = distance(integrate(s0, 0.02, 50), ref);
    const double e2 = distance(integrate(s0, 0.01, 100), ref);
    const double e3 = distance(integrate(s0, 0.005, 200), ref);
    return {e1 / e2, e2 / e3};
}

TEST(Rk4Step, GlobalErrorIsFourthOrder) {
    // Median over states on the attractor. A single start can sit where the
    // leading error term nearly cancels at t = 1; from (1, 1, 1) the factor
    // is about 38, printed for reference.
    const auto [f1, f2] = global_order_factors({1.0, 1.0, 1.0, 0.0});
    std::printf("  from (1,1,1): %.2f %.2f\n", f1, f2);
    std::vector<double> first, second;
    for (const auto& s : sample_attractor_states(11, 2024)) {
        const auto [a, b] = global_order_factors(s);
        std::printf("  attractor state: %.2f %.2f\n", a, b);
        first.push_back(a);
        second.push_back(b);
    }
    EXPECT_GE(median(first), 12.0);
    EXPECT_LE(median(first), 20.0);
    EXPECT_GE(median(second), 12.0);
    EXPECT_LE(median(second), 20.0);
}

TEST(LorenzIntegrator, TimeIsStepCountTimesH) {
    LorenzIntegrator integ({1.0, 1.0, 1.0, 0.0}, {}, 0.01, {});
    for (int i = 0; i < 5000; ++i) integ.step();
    EXPECT_EQ(integ.steps(), 5000);
    EXPECT_EQ(integ.time(), 5000 * 0.01);
}

TEST(LorenzIntegrator, ExtendedTracksNativeClosely) {
    const LorenzState n = integrate({1.0, 1.0, 1.0, 0.0}, 0.01, 500);
    const LorenzState e = integrate({1.0, 1.0, 1.0, 0.0}, 0.01, 500, {PrecisionSpec::extended()});
    EXPECT_LT(distance(n, e), 1e-8);
    EXPECT_NE(distance(n, e), 0.0);
}

TEST(RunLorenz, SamplingGrid) {
    LorenzRunConfig c;
    c.t_max = 1.05;
    c.sample_every = 10;
    const LorenzRun run = run_lorenz(c);
    ASSERT_EQ(run.samples.size(), 12u);
    EXPECT_EQ(run.samples.front().t, 0.0);
    EXPECT_EQ(run.samples[1].t, 10 * 0.01);
    EXPECT_EQ(run.samples.back().t, 105 * 0.01);
    EXPECT_FALSE(run.truncated);
}

TEST(RunTwin, NativeTwinsBitIdentical) {
    TwinConfig c;
    c.policy_b = {};
    const DivergenceReport r = run_twin(c);
    for (const auto& s : r.samples) {
        ASSERT_EQ(s.separation, 0.0);
        ASSERT_EQ(s.a, s.b);
    }
    EXPECT_FALSE(r.divergence_time.has_value());
    EXPECT_FALSE(r.efolding_estimate.has_value());
}

TEST(RunTwin, SevenDigitGoldenDivergence) {
    TwinConfig c;
    const DivergenceReport r = run_twin(c);
    ASSERT_TRUE(r.divergence_time.has_value());
    EXPECT_LT(*r.divergence_time, 50.0);
    // Golden value for x86-64 with strict binary64 arithmetic.
    EXPECT_EQ(*r.divergence_time, 1857 * 0.01);
    ASSERT_TRUE(r.efolding_estimate.has_value());
    EXPECT_GT(*r.efolding_estimate, 0.0);
    std::printf("  divergence_time=%.17g efolding=%.6g\n", *r.divergence_time,
                *r.efolding_estimate);

    // The crossing is always a recorded sample.
    const auto it = std::find_if(r.samples.begin(), r.samples.end(),
                                 [&](const TwinSample& s) { return s.t == *r.divergence_time; });
    ASSERT_NE(it, r.samples.end());
    EXPECT_GT(it->separation, 1.0);
}

TEST(RunTwin, MoreDigitsDivergeLater) {
    TwinConfig c7;
    TwinConfig c15;
    c15.policy_b = sig(15);
    const auto t7 = run_twin(c7).divergence_time;
    const auto t15 = run_twin(c15).divergence_time;
    ASSERT_TRUE(t7 && t15);
    EXPECT_GT(*t15, *t7);
}

TEST(RunTwin, RestartTruncationSeparatesAtTheInstant) {
    TwinConfig c;
    c.policy_b = {};
    c.t_max = 20.0;
    c.restart = RestartTruncation{3, 5.0};
    const DivergenceReport r = run_twin(c);
    bool seen = false;
    for (const auto& s : r.samples) {
        if (s.t < 5.0) {
            ASSERT_EQ(s.separation, 0.0) << s.t;
        } else if (s.t == 5.0) {
            EXPECT_GT(s.separation, 0.0);
            seen = true;
        }
    }
    EXPECT_TRUE(seen);
}

TEST(RunTwin, Validation) {
    TwinConfig c;
    c.threshold = 0.0;
    EXPECT_THROW(run_twin(c), ParameterError);
    c = TwinConfig{};
    c.t_max = -1.0;
    EXPECT_THROW(run_twin(c), ParameterError);
    c = TwinConfig{};
    c.restart = RestartTruncation{0, 1.0};
    EXPECT_THROW(run_twin(c), ParameterError);
}

TEST(AttractorSampling, DeterministicAndOnAttractor) {
    const auto a = sample_attractor_states(5, 42);
    const auto b = sample_attractor_states(5, 42);
    ASSERT_EQ(a, b);
    for (const auto& s : a) {
        EXPECT_LT(std::fabs(s.x), 30.0);
        EXPECT_GT(s.z, 0.0);
        EXPECT_EQ(s.t, 0.0);
    }
    EXPECT_NE(a, sample_attractor_states(5, 43));
}

TEST(RunTwin, MedianDivergenceTimeGrowsWithDigits) {
    const auto states = sample_attractor_states(20, 20240915);
    const std::vector<int> digits = {5, 7, 9, 11, 13, 15};
    std::vector<double> medians;
    for (int n : digits) {
        const auto times = parallel_map(states.size(), [&](std::size_t i) {
            TwinConfig c;
            c.s0 = states[i];
            c.t_max = 100.0;
            c.sample_every = 100;
            c.policy_b = sig(n);
            const auto r = run_twin(c);
            // Runs that never cross count as t_max.
            return r.divergence_time.value_or(c.t_max);
        });
        medians.push_back(median(times));
        std::printf("  n=%2d median divergence_time %.2f\n", n, medians.back());
    }
    int strict = 0;
    for (std::size_t i = 1; i < medians.size(); ++i) {
        EXPECT_GE(medians[i], medians[i - 1]);
        if (medians[i] > medians[i - 1]) ++strict;
    }
    EXPECT_EQ(strict, 5);
}

TEST(RunTwin, EfoldingPositiveWhenThresholdReached) {
    const auto states = sample_attractor_states(10, 7);
    for (const auto& s : states) {
        for (int n : {5, 9, 13}) {
            TwinConfig c;
            c.s0 = s;
            c.policy_b = sig(n);
            c.t_max = 100.0;
            const auto r = run_twin(c);
            if (!r.divergence_time) continue;
            ASSERT_TRUE(r.efolding_estimate.has_value());
            EXPECT_GT(*r.efolding_estimate, 0.0);
        }
    }
}
