#pragma once

#include <stdexcept>
#include <string>

namespace scca {

/// Malformed caller input: bad dimensions, out-of-range indices, unreadable files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A covariance model that cannot be solved: singular marginal blocks,
/// quadratic forms incompatible with positive semidefiniteness.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exhaustive search that would exceed its pattern budget.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& msg, long long pattern_count)
      : std::runtime_error(msg), pattern_count(pattern_count) {}

  long long pattern_count;
};

}  // namespace scca
