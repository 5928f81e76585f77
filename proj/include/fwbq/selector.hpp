#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "fwbq/density.hpp"
#include "fwbq/kernel.hpp"
#include "fwbq/mean_element.hpp"
#include "fwbq/quadrature.hpp"
#include "fwbq/rng.hpp"

namespace fwbq {

struct SelectionConfig {
  int pointCount = 10;
  int poolSize = 10000;  // fresh i.i.d. candidates drawn per iteration
  RngSeed seed{};
  // First design point; defaults to the pool argmax of mu_p (for the
  // Frank-Wolfe family) or the greedy variance minimiser (for SBQ).
  std::optional<Eigen::VectorXd> initialPoint;
};

struct SelectionTrace {
  std::vector<Eigen::VectorXd> points;
  // Frank-Wolfe family only; stepSizes[0] == 1.  Empty for SBQ and MC.
  std::vector<double> stepSizes;
  // Frank-Wolfe family: J(g_i) = MMD^2 / 2 under the implied convex weights.
  // SBQ: posterior variance after each selection.  Empty for MC.
  std::vector<double> objective;
  Method method = Method::MC;
};

// Linearised objective sum_l w_l k(x, x_l) - mu_p(x); each Frank-Wolfe
// iteration selects its argmin over the candidate pool.
double atomObjective(const Eigen::VectorXd& x,
                     const std::vector<Eigen::VectorXd>& points,
                     const Eigen::VectorXd& weights, const Kernel& k,
                     const MeanElement& mu);

// Exact line search along the segment from the current state towards the new
// atom, clamped to [0, 1].  Throws DegenerateStep when the atom coincides
// with the state in feature space.
double fwlsStep(const std::vector<Eigen::VectorXd>& points,
                const Eigen::VectorXd& weights, const Eigen::VectorXd& newPoint,
                const Kernel& k, const MeanElement& mu);

// Frank-Wolfe with fixed steps rho_i = 1/(i+1) (uniform implied weights).
SelectionTrace fwSelect(const TargetDensity& p, const Kernel& k, const MeanElement& mu,
                        const SelectionConfig& cfg);

// Frank-Wolfe with exact line search.
SelectionTrace fwlsSelect(const TargetDensity& p, const Kernel& k,
                          const MeanElement& mu, const SelectionConfig& cfg);

// Greedy posterior-variance minimisation over the pool (sequential BQ).
SelectionTrace sbqSelect(const TargetDensity& p, const Kernel& k, const MeanElement& mu,
                         const SelectionConfig& cfg);

// i.i.d. baseline; no step sizes or objective values.
SelectionTrace mcSelect(const TargetDensity& p, const SelectionConfig& cfg);

}  // namespace fwbq
