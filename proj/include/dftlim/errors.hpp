#pragma once

#include <stdexcept>
#include <string>

namespace dftlim {

/// Invalid user input: bad flags, malformed config files, inconsistent model
/// parameters, or table lookups that require rebuilding a larger table.
/// The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what_arg)
      : std::runtime_error(what_arg) {}
};

/// Numerical failure: solver non-convergence, overlapping recovery bumps,
/// degenerate fits. Always carries a diagnostic message (never a silent
/// wrong answer). The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what_arg)
      : std::runtime_error(what_arg) {}
};

}  // namespace dftlim
