#pragma once

// Rounding injection into a chaotic flow: the Lorenz system
//     x' = sigma (y - x),  y' = x (rho - z) - y,  z' = x y - beta z
// integrated with classical fixed-step RK4. The rounding policy is applied to
// x, y and z once at the end of every step; the four stages run in native
// arithmetic (double-double for the Extended policy).

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "plab/extended.hpp"
#include "plab/precision.hpp"

namespace plab {

// Classical chaotic parameters (Lorenz 1963).
struct LorenzParams {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;

    void validate() const;
};

struct LorenzState {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double t = 0.0;

    friend constexpr bool operator==(const LorenzState&, const LorenzState&) = default;
};

struct LorenzDerivative {
    double dx = 0.0;
    double dy = 0.0;
    double dz = 0.0;
};

LorenzDerivative lorenz_rhs(const LorenzState& s, const LorenzParams& p) noexcept;

// One RK4 step of size h followed by end-of-step rounding. The returned time
// is s.t + h. Throws ParameterError for h <= 0, DivergenceError when the
// new state is not finite. An Extended policy is treated as Native here;
// double-double integration goes through LorenzIntegrator.
LorenzState rk4_step(const LorenzState& s, const LorenzParams& p, double h,
                     const RoundingPolicy& policy);

// Fixed-step integrator that owns the step counter, so t = steps * h exactly
// rather than an accumulated sum.
class LorenzIntegrator {
public:
    LorenzIntegrator(const LorenzState& s0, const LorenzParams& params, double h,
                     const RoundingPolicy& policy);

    // Throws DivergenceError on a non-finite state.
    void step();

    // One-off truncation of the current state to `digits` significant
    // digits, as when a run is restarted from printed values.
    void truncate(int digits, TieRule tie_rule = TieRule::HalfAwayFromZero);

    std::int64_t steps() const noexcept { return steps_; }
    double time() const noexcept { return static_cast<double>(steps_) * h_; }
    LorenzState state() const noexcept;
    // Full state; the lo parts are zero except under the Extended policy.
    const std::array<DoubleDouble, 3>& precise_state() const noexcept { return state_; }

private:
    std::array<DoubleDouble, 3> state_;
    LorenzParams params_;
    double h_;
    RoundingPolicy policy_;
    std::int64_t steps_ = 0;
};

struct RestartTruncation {
    int digits = 3;
    double at_t = 0.0;
};

struct LorenzRunConfig {
    LorenzState s0{1.0, 1.0, 1.0, 0.0};
    LorenzParams params;
    double h = 0.01;
    double t_max = 50.0;
    RoundingPolicy policy;
    std::int64_t sample_every = 1;

    void validate() const;
    std::int64_t total_steps() const;
};

struct LorenzSample {
    double t = 0.0;
    std::array<DoubleDouble, 3> state;
};

struct LorenzRun {
    std::vector<LorenzSample> samples;
    bool truncated = false;  // stopped early on a non-finite state
};

// Samples at step 0, every sample_every steps and at the final step.
LorenzRun run_lorenz(const LorenzRunConfig& config);

struct TwinConfig {
    LorenzState s0{1.0, 1.0, 1.0, 0.0};
    // Starting point of trajectory b when it differs from s0.
    std::optional<LorenzState> s0_b;
    LorenzParams params;
    double h = 0.01;
    double t_max = 50.0;
    RoundingPolicy policy_a;
    RoundingPolicy policy_b = {PrecisionSpec::sig_digits(7), TieRule::HalfAwayFromZero};
    double threshold = 1.0;
    std::int64_t sample_every = 1;
    // Applied to trajectory b only.
    std::optional<RestartTruncation> restart;

    void validate() const;
};

struct TwinSample {
    double t = 0.0;
    double separation = 0.0;
    LorenzState a;
    LorenzState b;
};

// Window of separations used for the exponential growth fit.
inline constexpr double kEfoldingWindowLow = 1e-8;
inline constexpr double kEfoldingWindowHigh = 1.0;

struct DivergenceReport {
    std::vector<TwinSample> samples;
    double threshold = 1.0;
    // First sampled t with separation > threshold.
    std::optional<double> divergence_time;
    // Least-squares slope of ln(separation) against t over every step before
    // divergence_time whose separation lies in (1e-8, 1), independent of the
    // sampling stride.
    std::optional<double> efolding_estimate;
    // A trajectory went non-finite; samples stop at the last finite state.
    bool truncated = false;
};

// Separation is evaluated on every step; samples are kept at the sampling
// stride, at the divergence crossing, at a restart truncation and at the end.
DivergenceReport run_twin(const TwinConfig& config);

// Euclidean distance between two full states.
double separation(const std::array<DoubleDouble, 3>& a, const std::array<DoubleDouble, 3>& b);

// Slope of ln(separation) vs t over samples inside the e-folding window.
std::optional<double> efolding_slope(const std::vector<TwinSample>& samples,
                                     std::optional<double> until_t);

// States on the attractor: random starts near (1, 1, 1), each integrated
// natively through `transient` time units. Deterministic for a given seed.
std::vector<LorenzState> sample_attractor_states(std::size_t count, std::uint64_t seed,
                                                 const LorenzParams& params = {}, double h = 0.01,
                                                 double transient = 10.0);

}  // namespace plab
