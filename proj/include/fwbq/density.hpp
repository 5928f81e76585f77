#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "fwbq/rng.hpp"

namespace fwbq {

// Finite Gaussian mixture on R^d with full covariances.
class GaussianMixture {
 public:
  struct Component {
    double weight;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
  };

  // Validates dimensions, weight positivity and covariance SPD-ness.
  // Weights must sum to 1 within 1e-6; they are renormalised exactly.
  explicit GaussianMixture(std::vector<Component> components);

  static GaussianMixture single(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  int dim() const { return dim_; }
  const std::vector<Component>& components() const { return components_; }

  double pdf(const Eigen::VectorXd& x) const;
  std::vector<Eigen::VectorXd> sample(int count, RngSeed seed) const;

 private:
  int dim_;
  std::vector<Component> components_;
  std::vector<Eigen::MatrixXd> cholesky_;   // lower factors of each covariance
  std::vector<double> logNorm_;             // -d/2 log(2pi) - sum log L_ii
  std::vector<double> cumulativeWeight_;
};

// Product of independent N(1, 1/2) marginals restricted to [0, inf) per axis.
class TruncatedGaussian {
 public:
  explicit TruncatedGaussian(int dim);

  int dim() const { return dim_; }
  double pdf(const Eigen::VectorXd& x) const;
  // Per-axis rejection sampling from N(1, 1/2); acceptance rate ~0.92.
  std::vector<Eigen::VectorXd> sample(int count, RngSeed seed) const;

  static constexpr double kLocation = 1.0;
  static constexpr double kVariance = 0.5;

 private:
  int dim_;
};

using TargetDensity = std::variant<GaussianMixture, TruncatedGaussian>;

int dim(const TargetDensity& p);
double pdf(const TargetDensity& p, const Eigen::VectorXd& x);
std::vector<Eigen::VectorXd> sample(const TargetDensity& p, int count, RngSeed seed);

// Reproducible random mixture used as a default benchmark target: means
// uniform in [-1,1]^d, covariances A*A^T + 0.05*I with A entries uniform in
// [-0.5,0.5], weights proportional to Uniform(0.5,1.5).  Overlapping
// unit-order components keep the target smooth at the benchmark kernel
// lengthscales, where reweighted rules show their advantage.
GaussianMixture makeRandomMixture(int componentCount, int dim, RngSeed seed);

}  // namespace fwbq
