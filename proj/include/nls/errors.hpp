#pragma once

#include <stdexcept>
#include <string>

namespace nls {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sizes of grids, fields or samples do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A time step produced a singular system or non-finite values.
class StepError : public Error {
public:
    StepError(const std::string& what, int step) : Error(what), step_(step) {}
    int step() const noexcept { return step_; }

private:
    int step_;
};

/// A fixed-point iteration failed to contract. Carries the last observed
/// ratio of successive increments so callers can report it.
class NonContractionError : public Error {
public:
    NonContractionError(const std::string& what, double contraction)
        : Error(what), contraction_(contraction) {}
    double contraction() const noexcept { return contraction_; }

private:
    double contraction_;
};

/// Invalid scenario configuration or violated geometric hypothesis.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace nls
