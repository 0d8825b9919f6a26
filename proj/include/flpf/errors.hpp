#pragma once

#include <stdexcept>
#include <string>

namespace flpf {

/// Base for every error raised by the library. Subclasses map one-to-one
/// onto CLI exit codes (see tools/flpf_cli.cpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid model parameters (non-positive or non-finite rates, bad matrices).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent configuration (schedules, presets, config files).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input data: negative counts, duplicate measurements, empty series.
class InputError : public Error {
public:
    using Error::Error;
};

/// Every particle (or every SMC sampler sample) carries zero weight.
class DegeneracyError : public Error {
public:
    DegeneracyError(const std::string& what, int time_step)
        : Error(what), time_step_(time_step) {}

    int time_step() const noexcept { return time_step_; }

private:
    int time_step_;
};

/// File system failures.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace flpf
