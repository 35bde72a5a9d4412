#pragma once

#include <stdexcept>
#include <string>

namespace psifrac {

// Argument outside the mathematical domain of an operation (poles, t outside [a,b], ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument inside the domain but outside the range the algorithm can certify
// (e.g. a series whose cancellation guard tripped).
struct UnsupportedRangeError : std::domain_error {
    using std::domain_error::domain_error;
};

// Adaptive quadrature failed to reach the requested tolerance.
struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid experiment configuration: unknown key, bad value, inconsistent block.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace psifrac
