#pragma once

#include <cstddef>
#include <functional>

namespace fwbq {

struct IntegrationResult {
  double value = 0.0;
  double errorEstimate = 0.0;
  std::size_t evaluations = 0;
};

// Adaptive 7-15 Gauss-Kronrod quadrature on [lo, hi] to an absolute
// tolerance.  Bisects the interval with the largest error estimate until the
// summed estimate drops below absTol.  Throws ConvergenceFailure (carrying
// the achieved estimate) if the evaluation budget runs out first.
IntegrationResult integrateAdaptive(const std::function<double(double)>& f, double lo,
                                    double hi, double absTol,
                                    std::size_t maxEvaluations = 2'000'000);

}  // namespace fwbq
