#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "fwbq/rng.hpp"

namespace fwbq {

// Exponentiated-quadratic kernel k(x,y) = amplitude^2 * exp(-s * |x-y|^2).
// The exponent scale s and the lengthscale are kept consistent through
// s = 1 / (2 * lengthscale^2), so the two constructors are just different
// parameterisations of the same family (withExponentScale(a, 1, d) is the
// bare-exponent convention exp(-|x-y|^2) with lengthscale sqrt(1/2)).
class EqKernel {
 public:
  EqKernel(double amplitude, double lengthscale, int dim);
  static EqKernel withExponentScale(double amplitude, double scale, int dim);

  double eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

  int dim() const { return dim_; }
  double amplitude() const { return amplitude_; }
  double lengthscale() const { return lengthscale_; }
  double exponentScale() const { return exponentScale_; }

 private:
  double amplitude_;
  double lengthscale_;
  double exponentScale_;
  int dim_;
};

// Random Fourier feature approximation of an EQ kernel:
//   k(x,y) = (amplitude^2 / D) * sum_j z_j(x) z_j(y),
//   z_j(x) = sqrt(2) * cos(w_j . x + b_j),
// unbiased for EqKernel(amplitude, lengthscale) when w ~ N(0, lengthscale^-2 I)
// and b ~ Uniform[0, 2pi).  The feature space has dimension D, so grams of
// more than D points are rank deficient.
class RffKernel {
 public:
  RffKernel(Eigen::MatrixXd frequencies, Eigen::VectorXd phases, double amplitude,
            double lengthscale);

  double eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  Eigen::VectorXd features(const Eigen::VectorXd& x) const;  // the z_j(x)

  int dim() const { return static_cast<int>(frequencies_.cols()); }
  int featureCount() const { return static_cast<int>(frequencies_.rows()); }
  double amplitude() const { return amplitude_; }
  double lengthscale() const { return lengthscale_; }
  const Eigen::MatrixXd& frequencies() const { return frequencies_; }
  const Eigen::VectorXd& phases() const { return phases_; }

 private:
  Eigen::MatrixXd frequencies_;  // D x d
  Eigen::VectorXd phases_;       // D
  double amplitude_;
  double lengthscale_;
};

RffKernel sampleRff(double amplitude, double lengthscale, int dim, int featureCount,
                    RngSeed seed);

using Kernel = std::variant<EqKernel, RffKernel>;

double eval(const Kernel& k, const Eigen::VectorXd& x, const Eigen::VectorXd& y);
int dim(const Kernel& k);
double amplitude(const Kernel& k);
Eigen::MatrixXd gram(const Kernel& k, const std::vector<Eigen::VectorXd>& points);

}  // namespace fwbq
