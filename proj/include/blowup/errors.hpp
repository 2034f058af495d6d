#pragma once
#include <stdexcept>
#include <string>

namespace blowup {

// Bad input or configuration. Maps to CLI exit code 2.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument outside the domain of an operation (also a validation failure).
struct DomainError : ValidationError {
    using ValidationError::ValidationError;
};

// Quadrature/ODE/recursion failure. Maps to exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace blowup
