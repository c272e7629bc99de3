#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace plab {

// Non-finite input where a finite real is required.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Parameter outside its documented range.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Overflow, or an underflow that destroys an exact residual.
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

// Mismatched experiment configurations handed to a comparison.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An iteration left the finite range; carries the step index where it happened.
class StepRangeError : public RangeError {
public:
    StepRangeError(const std::string& what, std::int64_t step)
        : RangeError(what + " at step " + std::to_string(step)), step_(step) {}

    std::int64_t step() const noexcept { return step_; }

private:
    std::int64_t step_;
};

// An integration produced a non-finite state; carries the simulated time.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double t)
        : std::runtime_error(what + " at t=" + std::to_string(t)), t_(t) {}

    double time() const noexcept { return t_; }

private:
    double t_;
};

}  // namespace plab
