#include "plab/qc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "plab/errors.hpp"
#include "plab/parallel.hpp"

namespace plab {

namespace {

double clamp_digits(double d) noexcept {
    if (std::isnan(d)) return 0.0;
    return std::clamp(d, 0.0, kMaxAgreedDigits);
}

double relative_agreement(double diff, double scale) {
    if (diff == 0.0) return kMaxAgreedDigits;
    return clamp_digits(-std::log10(diff / std::max(scale, kAgreementFloor)));
}

// Specs sorted by nominal precision, highest first; ties keep input order.
std::vector<std::size_t> precision_order(std::span<const PrecisionSpec> specs) {
    std::vector<std::size_t> order(specs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return specs[a].nominal_digits() > specs[b].nominal_digits();
    });
    return order;
}

std::vector<std::pair<std::size_t, std::size_t>> pairs_of(std::size_t n, Pairing pairing) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (pairing == Pairing::Adjacent) {
            out.emplace_back(i, i + 1);
        } else {
            for (std::size_t j = i + 1; j < n; ++j) out.emplace_back(i, j);
        }
    }
    return out;
}

// One run reduced to (abscissa, observable) points.
struct Series {
    std::vector<double> at;
    std::vector<double> value;
};

AgreementSeries agreement(const Series& hi, const Series& lo,
                          std::pair<PrecisionSpec, PrecisionSpec> specs) {
    const std::size_t n = std::min(hi.at.size(), lo.at.size());
    AgreementSeries out;
    out.runs_compared = specs;
    out.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (hi.at[i] != lo.at[i])
            throw ConfigError("compare_runs: runs were sampled on different grids");
        out.samples.push_back({hi.at[i], agreed_digits(hi.value[i], lo.value[i])});
    }
    return out;
}

template <class RunOne>
std::vector<AgreementSeries> compare(std::span<const PrecisionSpec> specs, Pairing pairing,
                                     RunOne&& run_one) {
    if (specs.size() < 2) throw ConfigError("compare_runs needs at least two precision specs");
    const auto order = precision_order(specs);
    const auto runs = parallel_map(order.size(), [&](std::size_t i) {
        return run_one(specs[order[i]]);
    });
    std::vector<AgreementSeries> out;
    for (const auto& [i, j] : pairs_of(order.size(), pairing))
        out.push_back(agreement(runs[i], runs[j], {specs[order[i]], specs[order[j]]}));
    return out;
}

double rotation_value(const TrajectoryRecord& r, RotationObservable obs) noexcept {
    switch (obs) {
        case RotationObservable::Norm: return r.norm;
        case RotationObservable::Phase: return r.phase_deg;
        case RotationObservable::X: return r.v.x;
        case RotationObservable::Y: return r.v.y;
    }
    return r.norm;
}

}  // namespace

double agreed_digits(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b))
        throw DomainError("agreed_digits: non-finite input");
    if (a == b) return kMaxAgreedDigits;
    return relative_agreement(std::fabs(a - b), std::max(std::fabs(a), std::fabs(b)));
}

double agreed_digits(const LorenzState& a, const LorenzState& b) {
    for (double v : {a.x, a.y, a.z, b.x, b.y, b.z})
        if (!std::isfinite(v)) throw DomainError("agreed_digits: non-finite input");
    const double diff = std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
    const double scale = std::max(std::hypot(a.x, a.y, a.z), std::hypot(b.x, b.y, b.z));
    return relative_agreement(diff, scale);
}

RotationObservable parse_rotation_observable(std::string_view name) {
    if (name == "norm") return RotationObservable::Norm;
    if (name == "phase") return RotationObservable::Phase;
    if (name == "x") return RotationObservable::X;
    if (name == "y") return RotationObservable::Y;
    throw ParameterError("unknown rotation observable '" + std::string(name) + "'");
}

LorenzObservable parse_lorenz_observable(std::string_view name) {
    if (name == "x") return LorenzObservable::X;
    if (name == "y") return LorenzObservable::Y;
    if (name == "z") return LorenzObservable::Z;
    throw ParameterError("unknown Lorenz observable '" + std::string(name) + "'");
}

std::vector<AgreementSeries> compare_runs(const RotationExperimentConfig& experiment,
                                          std::span<const PrecisionSpec> specs,
                                          RotationObservable observable, Pairing pairing) {
    return compare(specs, pairing, [&](const PrecisionSpec& spec) {
        RotationExperimentConfig cfg = experiment;
        cfg.policy.spec = spec;
        Series s;
        run_rotation(cfg, [&](const TrajectoryRecord& r) {
            // A collapsed vector has no direction; its last record is not comparable.
            if (!std::isfinite(r.norm) || !std::isfinite(rotation_value(r, observable))) return;
            s.at.push_back(static_cast<double>(r.k));
            s.value.push_back(rotation_value(r, observable));
        });
        return s;
    });
}

std::vector<AgreementSeries> compare_runs(const LorenzRunConfig& experiment,
                                          std::span<const PrecisionSpec> specs,
                                          LorenzObservable observable, Pairing pairing) {
    const auto index = static_cast<std::size_t>(observable);
    return compare(specs, pairing, [&](const PrecisionSpec& spec) {
        LorenzRunConfig cfg = experiment;
        cfg.policy.spec = spec;
        const LorenzRun run = run_lorenz(cfg);
        Series s;
        for (const auto& sample : run.samples) {
            s.at.push_back(sample.t);
            s.value.push_back(sample.state[index].to_native());
        }
        return s;
    });
}

double trust_estimate(const AgreementSeries& series, double at) {
    const auto& s = series.samples;
    if (s.empty() || !(at >= s.front().at && at <= s.back().at))
        throw ParameterError("trust_estimate: abscissa outside the series");
    const auto it = std::lower_bound(s.begin(), s.end(), at,
                                     [](const AgreementSample& a, double v) { return a.at < v; });
    if (it->at == at) return it->digits;
    const auto prev = std::prev(it);
    const double w = (at - prev->at) / (it->at - prev->at);
    return prev->digits + w * (it->digits - prev->digits);
}

}  // namespace plab
