#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fwbq/quadrature.hpp"
#include "fwbq/rng.hpp"

namespace fwbq {

// Time courses of a phosphorylation assay: substrate and phospho-substrate
// abundances plus one phospho-enzyme column per candidate kinase.  All series
// are nonnegative and share a strictly increasing time grid.
struct LongitudinalData {
  Eigen::VectorXd times;          // T+1 entries
  Eigen::VectorXd substrate;      // y_S
  Eigen::VectorXd substratePhos;  // y_S*
  Eigen::MatrixXd enzymePhos;     // (T+1) x enzymeCount, y_E*

  int enzymeCount() const { return static_cast<int>(enzymePhos.cols()); }
  void validate() const;  // throws InvalidInput
};

// A candidate explanation: which enzymes (by column index) drive the
// substrate's phosphorylation.  At most two enzymes per model.
struct CandidateModel {
  std::vector<int> enzymes;
  int paramCount() const { return 1 + static_cast<int>(enzymes.size()); }
  std::string label() const;  // "none", "E3", "E3+E7"
};

// The empty model, all singletons, then all pairs (deterministic order).
std::vector<CandidateModel> enumerateModels(int enzymeCount);

// Finite-difference response Y and Michaelis-Menten regressor matrix X for
// the given saturation constants K (K[0] for the substrate self-term, then
// one per model enzyme).  X has one row per time increment.
struct DesignSystem {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
};
DesignSystem buildDesign(const LongitudinalData& data, const CandidateModel& model,
                         const Eigen::VectorXd& k);

// Marginal likelihood of the data given saturation constants K, with the
// rate coefficients integrated out under a unit-information g-prior:
//   L = (2 pi)^{-N/2} (N+1)^{-d/2} Gamma(N/2) b_N^{-N/2}.
// Computed in log space; conditionalEvidence exponentiates and may underflow.
double logConditionalEvidence(const LongitudinalData& data, const CandidateModel& model,
                              const Eigen::VectorXd& k);
double conditionalEvidence(const LongitudinalData& data, const CandidateModel& model,
                           const Eigen::VectorXd& k);

// Gaussian posterior over an integral of exp(logF) against the truncated
// Gaussian prior on [0, inf)^d, computed on rescaled values exp(logF - logScale)
// with logScale = max over design points, so the linear solve never sees
// underflowed numbers.  The posterior refers to the rescaled integrand.
struct EvidencePosterior {
  IntegralPosterior posterior;
  double logScale = 0.0;
};

EvidencePosterior integrateLogPosterior(
    const std::function<double(const Eigen::VectorXd&)>& logF, int d, Method method,
    int pointCount, int poolSize, RngSeed seed);

// Posterior over the model evidence L(M) = integral of L(K, M) prior(K) dK.
EvidencePosterior modelEvidence(const LongitudinalData& data,
                                const CandidateModel& model, Method method,
                                int pointCount, int poolSize, RngSeed seed);

// Push the per-model evidence posteriors through to model probabilities by
// sampling: draw one evidence value per model, reject vectors with any
// nonpositive draw, normalise the rest.
struct EvidenceSummary {
  Eigen::MatrixXd quantiles;  // models x {2.5, 25, 50, 75, 97.5} percentiles
  double mapStability = 0.0;  // fraction of samples agreeing with the modal MAP
  int modalMap = 0;
  double acceptedFraction = 0.0;
};
EvidenceSummary propagate(const std::vector<EvidencePosterior>& perModel,
                          int sampleCount, RngSeed seed);

// Seeded synthetic assay: smooth positive enzyme/substrate curves, a true
// model drawn from the prior, and the phospho-substrate series simulated
// forward from the rate model with Gaussian observation noise on the rates.
LongitudinalData makeSyntheticData(int enzymeCount, int timePointCount,
                                   double noiseSd, RngSeed seed);

// Plain CSV with a header row: time,yS,ySstar,yE1star,...
LongitudinalData readLongitudinalData(std::istream& in);
void writeLongitudinalData(const LongitudinalData& data, std::ostream& out);

}  // namespace fwbq
