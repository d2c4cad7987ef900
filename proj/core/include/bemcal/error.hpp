#pragma once

#include <stdexcept>
#include <string>

namespace bemcal {

/// Raised when inputs violate an operation's preconditions or a file fails
/// validation. The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a simulation diverges or a computation cannot proceed at run
/// time. The CLI maps this (and any other std::exception) to exit code 2.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bemcal
