#pragma once

#include <stdexcept>
#include <string>

#include "monna/param_vector.hpp"

namespace monna {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched dimensions, empty inputs and other shape problems.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An aggregation rule received fewer vectors than its arity requires.
class InsufficientInputError : public Error {
public:
    using Error::Error;
};

/// Iterative solver gave up; the last iterate is kept for callers that can use it.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, ParamVector last_iterate)
        : Error(what), last_iterate_(std::move(last_iterate)) {}
    const ParamVector& last_iterate() const noexcept { return last_iterate_; }

private:
    ParamVector last_iterate_;
};

/// (n, f) outside the fault-tolerance regime a formula is valid for.
class RegimeError : public Error {
public:
    using Error::Error;
};

class UnsupportedAttackError : public Error {
public:
    using Error::Error;
};

/// Invalid experiment configuration. `field` is the dotted key path.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A monitored invariant failed during a run.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

}  // namespace monna
