#pragma once

#include <stdexcept>
#include <string>

namespace crmot {

// Thrown for invalid inputs, malformed files, unknown keys, broken preconditions.
// The CLI maps this family to exit code 1.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a numerical procedure fails (non-convergence, step-size trouble,
// lost adiabatic tracking). The CLI maps this family to exit code 2.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace crmot
