#pragma once

#include <stdexcept>
#include <string>

namespace mht {

/// Invalid parameters (bad shapes, out-of-range hyperparameters, no admissible contour).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function (poles, non-PD matrices, eps <= 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed or insufficient input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine failed to reach its target accuracy or diverged.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mellin-Barnes integration did not converge; carries the partial estimate.
class AccuracyError : public NumericalError {
public:
    AccuracyError(const std::string& what, double partial, double error_estimate)
        : NumericalError(what), partial_(partial), error_estimate_(error_estimate) {}

    double partial() const noexcept { return partial_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double partial_;
    double error_estimate_;
};

/// SDE integration blew up.
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, int level) : NumericalError(what), level_(level) {}
    int level() const noexcept { return level_; }

private:
    int level_;
};

}  // namespace mht
