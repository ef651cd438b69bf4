#pragma once

#include <stdexcept>
#include <string>

namespace seqpred {

// Raised when an exact/exhaustive routine would enumerate more states than
// the configured budget allows. The message names the offending size so the
// caller can switch to a sampling variant.
struct BudgetExceeded : std::runtime_error {
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a stationary initial distribution cannot be reached by power
// iteration (periodic or otherwise non-ergodic context chain).
struct StationarySolveError : std::runtime_error {
  explicit StationarySolveError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace seqpred
