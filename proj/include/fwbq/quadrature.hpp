#pragma once

#include <Eigen/Dense>
#include <string_view>
#include <vector>

#include "fwbq/kernel.hpp"
#include "fwbq/mean_element.hpp"

namespace fwbq {

enum class Method { MC, FW, FWLS, FWBQ, FWLSBQ, SBQ };

std::string_view methodName(Method m);
Method parseMethod(std::string_view name);   // throws InvalidInput
bool usesBqWeights(Method m);                // FWBQ, FWLSBQ, SBQ
bool usesLineSearch(Method m);               // FWLS, FWLSBQ

struct QuadratureRule {
  std::vector<Eigen::VectorXd> points;
  Eigen::VectorXd weights;
  Method method = Method::MC;
};

// Gaussian posterior over the integral p[f].
struct IntegralPosterior {
  double mean = 0.0;
  double variance = 0.0;
};

// Convex-combination weights implied by a Frank-Wolfe step-size sequence
// (stepSizes[0] must be 1): w_i = rho_i * prod_{j>i} (1 - rho_j).
Eigen::VectorXd fwWeights(const std::vector<double>& stepSizes);

// Minimax / Bayesian quadrature weights K^{-1} z with z_i = mu_p(x_i).
// Points must be pairwise distinct (merge duplicates first).
Eigen::VectorXd bqWeights(const std::vector<Eigen::VectorXd>& points, const Kernel& k,
                          const MeanElement& mu);

double apply(const QuadratureRule& rule, const Eigen::VectorXd& fValues);

// Squared worst-case integration error over the unit ball of the RKHS:
//   p[mu_p] - 2 sum_i w_i mu_p(x_i) + sum_ij w_i w_j k(x_i, x_j).
// Tiny negative values (within 1e-10 * amplitude^2) clamp to zero.
double mmdSquared(const QuadratureRule& rule, const Kernel& k, const MeanElement& mu);

// Gaussian posterior N(z' K^{-1} f, p[mu_p] - z' K^{-1} z) over the integral.
// The variance is evaluated as the MMD^2 of the BQ-weighted rule, which is the
// same quantity written in a form that stays consistent with mmdSquared when
// the solve is jittered.  Zero points returns the prior N(0, p[mu_p]).
IntegralPosterior posterior(const std::vector<Eigen::VectorXd>& points,
                            const Eigen::VectorXd& fValues, const Kernel& k,
                            const MeanElement& mu);

// Posterior mass outside the interval (lo, hi); lo/hi may be infinite.
double contractionMass(const IntegralPosterior& post, double lo, double hi);

// Tail mass erfc(gamma / (sqrt(2) sigma)) together with its large-deviation
// asymptotic (sqrt(2) sigma / (sqrt(pi) gamma)) exp(-gamma^2 / (2 sigma^2)).
struct ContractionBound {
  double exact;
  double asymptotic;
};
ContractionBound contractionBound(double gamma, double sigmaN);

// Merge bit-identical points, summing their weights (first occurrence kept).
QuadratureRule mergeDuplicates(const std::vector<Eigen::VectorXd>& points,
                               const Eigen::VectorXd& weights, Method method);
std::vector<Eigen::VectorXd> uniquePoints(const std::vector<Eigen::VectorXd>& points);

// Cholesky of gram + jitter, escalating the diagonal jitter from 0 through
// 1e-10 * amplitudeSq up to 1e-4 * amplitudeSq until the factorisation
// succeeds; throws IllConditionedGram (with a condition estimate) otherwise.
struct GramFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter;
};
GramFactor factorGram(const Eigen::MatrixXd& gramMatrix, double amplitudeSq);

}  // namespace fwbq
