#pragma once

#include <stdexcept>
#include <string>

namespace fowlerkit {

/// Invalid physical parameters (Hardy bound, dimension, exponents) or invalid config.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// The requested object (branch, family, structure setting) does not exist in this regime.
struct RegimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Base for failures of the numerical machinery rather than of the input.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Adaptive step size underflowed or the state became non-finite.
struct StepFailure : NumericalError {
    StepFailure(const std::string& what, double t, double x, double y)
        : NumericalError(what), t(t), x(x), y(y) {}
    double t, x, y;  // last good state
};

/// Seed lies beyond the empirical D^inf / L^inf: the launch side blows up before the switch.
struct SeedOverflow : NumericalError {
    using NumericalError::NumericalError;
};

/// No classification flip was found in the scanned seed range.
struct BracketNotFound : NumericalError {
    BracketNotFound(const std::string& what, double lo, double hi)
        : NumericalError(what), lo(lo), hi(hi) {}
    double lo, hi;
};

}  // namespace fowlerkit
