#pragma once

#include <stdexcept>
#include <string>

namespace fwbq {

// Caller handed us something outside a documented precondition.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An iterative numerical routine ran out of budget before reaching the
// requested tolerance; carries the error estimate it did achieve.
struct ConvergenceFailure : std::runtime_error {
  ConvergenceFailure(const std::string& what, double achieved)
      : std::runtime_error(what), achievedError(achieved) {}
  double achievedError;
};

// Gram matrix could not be factorised even at the maximum diagonal jitter.
struct IllConditionedGram : std::runtime_error {
  IllConditionedGram(const std::string& what, double condition)
      : std::runtime_error(what), conditionEstimate(condition) {}
  double conditionEstimate;
};

// Line-search denominator vanished: the proposed point is numerically
// indistinguishable from the current state in feature space.
struct DegenerateStep : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A quantity that is nonnegative (or otherwise constrained) in exact
// arithmetic came out far enough outside its range to indicate a real problem.
struct NumericalInconsistency : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Posterior sampling rejected essentially every draw.
struct DegeneratePosterior : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Regression design is rank deficient.
struct IllPosedDesign : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fwbq
