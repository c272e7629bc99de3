#include "plab/lorenz.hpp"

#include <cmath>
#include <random>
#include <string>

#include "plab/errors.hpp"

namespace plab {

namespace {

using DDState = std::array<DoubleDouble, 3>;

template <class Real>
std::array<Real, 3> rhs(const std::array<Real, 3>& s, const LorenzParams& p) {
    const Real sigma(p.sigma), rho(p.rho), beta(p.beta);
    return {sigma * (s[1] - s[0]), s[0] * (rho - s[2]) - s[1], s[0] * s[1] - beta * s[2]};
}

template <class Real>
std::array<Real, 3> axpy(const std::array<Real, 3>& s, const Real& a, const std::array<Real, 3>& k) {
    return {s[0] + a * k[0], s[1] + a * k[1], s[2] + a * k[2]};
}

template <class Real>
std::array<Real, 3> rk4(const std::array<Real, 3>& s, const LorenzParams& p, double h_native) {
    const Real h(h_native);
    const Real half_h = h * Real(0.5);
    const auto k1 = rhs(s, p);
    const auto k2 = rhs(axpy(s, half_h, k1), p);
    const auto k3 = rhs(axpy(s, half_h, k2), p);
    const auto k4 = rhs(axpy(s, h, k3), p);
    const Real sixth_h = h / Real(6.0);
    const Real two(2.0);
    std::array<Real, 3> out;
    for (std::size_t i = 0; i < 3; ++i)
        out[i] = s[i] + sixth_h * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
    return out;
}

std::array<double, 3> natives(const DDState& s) {
    return {s[0].to_native(), s[1].to_native(), s[2].to_native()};
}

LorenzState to_state(const DDState& s, double t) {
    return {s[0].to_native(), s[1].to_native(), s[2].to_native(), t};
}

void require_step(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("step size h must be > 0");
}

}  // namespace

void LorenzParams::validate() const {
    if (!std::isfinite(sigma) || !std::isfinite(rho) || !std::isfinite(beta))
        throw ParameterError("Lorenz parameters must be finite");
}

LorenzDerivative lorenz_rhs(const LorenzState& s, const LorenzParams& p) noexcept {
    const auto d = rhs<double>({s.x, s.y, s.z}, p);
    return {d[0], d[1], d[2]};
}

LorenzState rk4_step(const LorenzState& s, const LorenzParams& p, double h,
                     const RoundingPolicy& policy) {
    require_step(h);
    const auto next = rk4<double>({s.x, s.y, s.z}, p, h);
    const double t = s.t + h;
    for (double v : next)
        if (!std::isfinite(v)) throw DivergenceError("Lorenz state left the finite range", t);
    return {apply(policy, next[0]), apply(policy, next[1]), apply(policy, next[2]), t};
}

LorenzIntegrator::LorenzIntegrator(const LorenzState& s0, const LorenzParams& params, double h,
                                   const RoundingPolicy& policy)
    : state_{DoubleDouble(s0.x), DoubleDouble(s0.y), DoubleDouble(s0.z)},
      params_(params),
      h_(h),
      policy_(policy) {
    require_step(h);
    params.validate();
}

void LorenzIntegrator::step() {
    const double t_next = static_cast<double>(steps_ + 1) * h_;
    if (policy_.spec.mode() == PrecisionMode::Extended) {
        try {
            state_ = rk4<DoubleDouble>(state_, params_, h_);
        } catch (const RangeError&) {
            throw DivergenceError("Lorenz state left the finite range", t_next);
        }
    } else {
        const auto n = natives(state_);
        const LorenzState next = rk4_step({n[0], n[1], n[2], 0.0}, params_, h_, policy_);
        state_ = {DoubleDouble(next.x), DoubleDouble(next.y), DoubleDouble(next.z)};
    }
    for (const auto& v : state_)
        if (!v.is_finite()) throw DivergenceError("Lorenz state left the finite range", t_next);
    ++steps_;
}

void LorenzIntegrator::truncate(int digits, TieRule tie_rule) {
    for (auto& v : state_) v = DoubleDouble(round_sig(v.to_native(), digits, tie_rule));
}

LorenzState LorenzIntegrator::state() const noexcept { return to_state(state_, time()); }

void LorenzRunConfig::validate() const {
    require_step(h);
    params.validate();
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ParameterError("t_max must be > 0");
    if (sample_every < 1) throw ParameterError("sample_every must be >= 1");
}

std::int64_t LorenzRunConfig::total_steps() const {
    return static_cast<std::int64_t>(std::llround(t_max / h));
}

LorenzRun run_lorenz(const LorenzRunConfig& config) {
    config.validate();
    const std::int64_t total = config.total_steps();
    LorenzIntegrator integ(config.s0, config.params, config.h, config.policy);
    LorenzRun run;
    run.samples.push_back({0.0, integ.precise_state()});
    while (integ.steps() < total) {
        try {
            integ.step();
        } catch (const DivergenceError&) {
            run.truncated = true;
            if (run.samples.back().t != integ.time())
                run.samples.push_back({integ.time(), integ.precise_state()});
            break;
        }
        if (integ.steps() % config.sample_every == 0 || integ.steps() == total)
            run.samples.push_back({integ.time(), integ.precise_state()});
    }
    return run;
}

void TwinConfig::validate() const {
    require_step(h);
    params.validate();
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ParameterError("t_max must be > 0");
    if (!(threshold > 0.0)) throw ParameterError("threshold must be > 0");
    if (sample_every < 1) throw ParameterError("sample_every must be >= 1");
    if (restart && (restart->digits < kMinSigDigits || restart->digits > kMaxSigDigits))
        throw ParameterError("restart truncation digits must be in [1, 17]");
}

double separation(const DDState& a, const DDState& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double d = detail::add_unchecked(a[i], -b[i]).to_native();
        sum += d * d;
    }
    return std::sqrt(sum);
}

namespace {

// Running least-squares sums for ln(separation) against t.
struct SlopeFit {
    double n = 0.0, st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;

    void add(double t, double sep) {
        if (!(sep > kEfoldingWindowLow && sep < kEfoldingWindowHigh)) return;
        const double l = std::log(sep);
        n += 1.0;
        st += t;
        sl += l;
        stt += t * t;
        stl += t * l;
    }

    std::optional<double> slope() const {
        const double denom = n * stt - st * st;
        if (n < 2.0 || denom <= 0.0) return std::nullopt;
        return (n * stl - st * sl) / denom;
    }
};

}  // namespace

std::optional<double> efolding_slope(const std::vector<TwinSample>& samples,
                                     std::optional<double> until_t) {
    SlopeFit fit;
    for (const auto& s : samples) {
        if (until_t && s.t >= *until_t) break;
        fit.add(s.t, s.separation);
    }
    return fit.slope();
}

DivergenceReport run_twin(const TwinConfig& config) {
    config.validate();
    const auto total = static_cast<std::int64_t>(std::llround(config.t_max / config.h));
    std::optional<std::int64_t> restart_step;
    if (config.restart)
        restart_step = static_cast<std::int64_t>(std::llround(config.restart->at_t / config.h));

    LorenzIntegrator a(config.s0, config.params, config.h, config.policy_a);
    LorenzIntegrator b(config.s0_b.value_or(config.s0), config.params, config.h, config.policy_b);

    DivergenceReport report;
    report.threshold = config.threshold;
    const auto record = [&]() {
        report.samples.push_back({a.time(), separation(a.precise_state(), b.precise_state()),
                                  a.state(), b.state()});
    };
    record();
    if (report.samples.back().separation > config.threshold) report.divergence_time = 0.0;
    SlopeFit fit;
    if (!report.divergence_time) fit.add(0.0, report.samples.back().separation);

    while (a.steps() < total) {
        try {
            a.step();
            b.step();
        } catch (const DivergenceError&) {
            report.truncated = true;
            break;
        }
        bool force = false;
        if (restart_step && b.steps() == *restart_step) {
            b.truncate(config.restart->digits);
            force = true;
        }
        const double sep = separation(a.precise_state(), b.precise_state());
        if (!report.divergence_time && sep > config.threshold) {
            report.divergence_time = a.time();
            force = true;
        }
        if (!report.divergence_time) fit.add(a.time(), sep);
        if (force || a.steps() % config.sample_every == 0 || a.steps() == total) record();
    }
    report.efolding_estimate = fit.slope();
    return report;
}

std::vector<LorenzState> sample_attractor_states(std::size_t count, std::uint64_t seed,
                                                 const LorenzParams& params, double h,
                                                 double transient) {
    std::mt19937_64 rng(seed);
    // 53 random bits mapped onto [-1, 1); mt19937_64 output is fixed by the standard.
    const auto jitter = [&rng]() { return std::ldexp(static_cast<double>(rng() >> 11), -52) - 1.0; };
    const auto steps = static_cast<std::int64_t>(std::llround(transient / h));
    std::vector<LorenzState> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const LorenzState start{1.0 + jitter(), 1.0 + jitter(), 1.0 + jitter(), 0.0};
        LorenzIntegrator integ(start, params, h, RoundingPolicy{});
        for (std::int64_t k = 0; k < steps; ++k) integ.step();
        LorenzState s = integ.state();
        s.t = 0.0;
        out.push_back(s);
    }
    return out;
}

}  // namespace plab
