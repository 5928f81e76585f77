#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fwbq/density.hpp"
#include "fwbq/evidence.hpp"
#include "fwbq/kernel.hpp"
#include "fwbq/quadrature.hpp"
#include "fwbq/report.hpp"
#include "fwbq/rng.hpp"

namespace fwbq {

// Design sizes {1,2,3,5,7} * 10^k up to nMax, with nMax itself appended, so
// convergence tables sample evenly on a log axis.
std::vector<int> sizeGrid(int nMax);

struct ExperimentConfig {
  TargetDensity density{GaussianMixture::single(Eigen::VectorXd::Zero(1),
                                                Eigen::MatrixXd::Identity(1, 1))};
  double amplitude = 1.0;    // kernel lambda
  double lengthscale = 0.8;  // kernel sigma
  std::vector<Method> methods{Method::MC,   Method::FW,     Method::FWLS,
                              Method::FWBQ, Method::FWLSBQ, Method::SBQ};
  int nMax = 100;
  int poolSize = 10000;
  RngSeed seed{};
};

// Integrand built from kernel translates: f = sum_j coeffs[j] k(., centres[j]).
// Its integral against p is exactly sum_j coeffs[j] mu_p(centres[j]) and its
// RKHS norm is sqrt(c' K c), so error bounds can be checked without any
// numerical ground truth.
struct KernelCombination {
  std::vector<Eigen::VectorXd> centres;
  Eigen::VectorXd coeffs;
};

// MMD^2 traces (plus the posterior variance for BQ-weighted methods) over the
// size grid; point sets are nested across n within each method, and the FW /
// FWBQ pair (likewise FWLS / FWLSBQ) share one selection trace.
std::vector<ResultRow> runConvergence(const ExperimentConfig& cfg);

// Integral estimates for a known integrand: absolute error against the exact
// integral, posterior mean/variance and the 1.96-sigma coverage flag for
// BQ-weighted methods.
std::vector<ResultRow> runPosteriorDemo(const ExperimentConfig& cfg,
                                        const KernelCombination& f);

// FWLS and FWLSBQ under the exact kernel and under a random-feature
// approximation with the given feature count.  Approximation rows carry a
// "-RFF<D>" method suffix; their mmd2 is always measured in the exact
// kernel's norm, while posteriorVariance stays the feature model's own.
std::vector<ResultRow> runRff(const ExperimentConfig& cfg, int featureCount);

struct ModelSelectConfig {
  int enzymeCount = 10;
  int timePointCount = 8;
  double noiseSd = 0.2;
  Method method = Method::FWBQ;
  int nMax = 200;
  int poolSize = 1000;
  int sampleCount = 400;  // posterior probability draws per design size
  RngSeed seed{};
  std::optional<LongitudinalData> data;  // ingested instead of synthetic when set
  // Explicit design sizes (ascending); default is the log grid up to nMax.
  std::optional<std::vector<int>> sizes;
};

// The dataset a model-selection run will analyse: the ingested one when
// cfg.data is set, otherwise the seeded synthetic assay.
LongitudinalData modelSelectData(const ModelSelectConfig& cfg);

// Box-plot statistics of the sampled posterior model probabilities at each
// design size in the grid, one row per (n, candidate model).
std::vector<ModelRow> runModelSelect(const ModelSelectConfig& cfg);

// Plain-text key-value configs (one directive per line, '#' comments):
//   density:  "type mixture|truncated", "dim <d>", then per-component lines
//             "component <weight> <mean...> <cov row-major...>"
//   integrand: "centre <coeff> <x1> ... <xd>" lines
TargetDensity parseDensityConfig(std::istream& in);
KernelCombination parseFunctionConfig(std::istream& in, int dim);

// The seeded 20-component 2-D mixture used as the default benchmark target.
GaussianMixture defaultBenchmarkMixture();

// Seeded integrand for posterior-demo runs when no explicit one is given:
// a handful of kernel translates with centres drawn from the target.
KernelCombination defaultIntegrand(const TargetDensity& p, RngSeed seed);

}  // namespace fwbq
