#pragma once

#include <stdexcept>
#include <string>

namespace spectre {

/// Argument outside the domain of a function (e.g. m outside (-1/(c b_nu), 0)).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Source power at or below the detectability threshold.
class SubcriticalError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Root bracketing or iteration failed to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: malformed config, bad matrix file, contradictory
/// settings. Maps to exit code 2 in the command-line tool.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace spectre
