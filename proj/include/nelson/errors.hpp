#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nelson {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: bad parameters, unsupported states, malformed files.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A request that is well formed but outside what a module supports.
class UnsupportedState : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Symbolic truncation too small to certify a result.
class TruncationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Failure of a numerical procedure (instability, overflow, non-finite values).
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularDrift : public NumericalError {
public:
    SingularDrift(const std::string& what, double location)
        : NumericalError(what), location_(location) {}
    double location() const noexcept { return location_; }

private:
    double location_;
};

class NonFiniteSample : public NumericalError {
public:
    NonFiniteSample(const std::string& what, std::int64_t trajectory, std::int64_t step)
        : NumericalError(what), trajectory_(trajectory), step_(step) {}
    std::int64_t trajectory() const noexcept { return trajectory_; }
    std::int64_t step() const noexcept { return step_; }

private:
    std::int64_t trajectory_;
    std::int64_t step_;
};

class StabilityViolation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InsufficientSamples : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace nelson
