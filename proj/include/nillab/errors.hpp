#pragma once

#include <stdexcept>
#include <string>

namespace nillab {

/// A requested computation would exceed the configured evaluation budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter fails the rational-independence screen required for ergodicity.
class UncertifiedParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace nillab
