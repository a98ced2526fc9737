#pragma once

#include <stdexcept>
#include <string>

namespace spg {

/// Raised when a caller breaks an operation's preconditions (dimension
/// mismatch, non-PD curvature, non-Schur closed loop, ...).
class ContractViolation : public std::invalid_argument {
 public:
  explicit ContractViolation(const std::string& what)
      : std::invalid_argument(what) {}
};

/// Raised for malformed user input (config files, CLI arguments, JSON).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a numerical routine fails in a way that indicates a bug or an
/// unmet construction requirement (e.g. no finite determination by k_cap).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace spg
