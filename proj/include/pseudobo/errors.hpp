#pragma once

#include <stdexcept>
#include <string>

namespace pseudobo {

/// Invalid configuration: bad weights, arity mismatch, budget < n_init, ...
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A point or argument outside the domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Factorization failure, infeasible calibration and similar.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation invoked on an object that is not ready (e.g. empty dataset).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// An external objective process failed or produced unparsable output.
class ObjectiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pseudobo
