#include "fwbq/kernel.hpp"

#include <cmath>
#include <numbers>

#include "fwbq/errors.hpp"

namespace fwbq {

EqKernel::EqKernel(double amplitude, double lengthscale, int dim)
    : amplitude_(amplitude), lengthscale_(lengthscale), dim_(dim) {
  if (!(amplitude > 0.0)) throw InvalidInput("kernel amplitude must be positive");
  if (!(lengthscale > 0.0)) throw InvalidInput("kernel lengthscale must be positive");
  if (dim < 1) throw InvalidInput("kernel dimension must be positive");
  exponentScale_ = 1.0 / (2.0 * lengthscale * lengthscale);
}

EqKernel EqKernel::withExponentScale(double amplitude, double scale, int dim) {
  if (!(scale > 0.0)) throw InvalidInput("kernel exponent scale must be positive");
  return EqKernel(amplitude, std::sqrt(1.0 / (2.0 * scale)), dim);
}

double EqKernel::eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  if (x.size() != dim_ || y.size() != dim_)
    throw InvalidInput("kernel input dimension mismatch");
  return amplitude_ * amplitude_ * std::exp(-exponentScale_ * (x - y).squaredNorm());
}

RffKernel::RffKernel(Eigen::MatrixXd frequencies, Eigen::VectorXd phases,
                     double amplitude, double lengthscale)
    : frequencies_(std::move(frequencies)),
      phases_(std::move(phases)),
      amplitude_(amplitude),
      lengthscale_(lengthscale) {
  if (frequencies_.rows() != phases_.size())
    throw InvalidInput("feature count mismatch between frequencies and phases");
  if (frequencies_.rows() < 1) throw InvalidInput("need at least one feature");
  if (frequencies_.cols() < 1) throw InvalidInput("kernel dimension must be positive");
  if (!(amplitude > 0.0)) throw InvalidInput("kernel amplitude must be positive");
  if (!(lengthscale > 0.0)) throw InvalidInput("kernel lengthscale must be positive");
}

Eigen::VectorXd RffKernel::features(const Eigen::VectorXd& x) const {
  if (x.size() != frequencies_.cols())
    throw InvalidInput("kernel input dimension mismatch");
  Eigen::VectorXd z = frequencies_ * x + phases_;
  for (int j = 0; j < z.size(); ++j) z[j] = std::numbers::sqrt2 * std::cos(z[j]);
  return z;
}

double RffKernel::eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  const double scale = amplitude_ * amplitude_ / featureCount();
  return scale * features(x).dot(features(y));
}

RffKernel sampleRff(double amplitude, double lengthscale, int dim, int featureCount,
                    RngSeed seed) {
  if (featureCount < 1) throw InvalidInput("featureCount must be positive");
  if (dim < 1) throw InvalidInput("dim must be positive");
  if (!(lengthscale > 0.0)) throw InvalidInput("kernel lengthscale must be positive");
  Rng rng(seed);
  Eigen::MatrixXd w(featureCount, dim);
  Eigen::VectorXd b(featureCount);
  for (int j = 0; j < featureCount; ++j) {
    for (int i = 0; i < dim; ++i) w(j, i) = rng.normal() / lengthscale;
    b[j] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  return RffKernel(std::move(w), std::move(b), amplitude, lengthscale);
}

double eval(const Kernel& k, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return std::visit([&](const auto& kk) { return kk.eval(x, y); }, k);
}

int dim(const Kernel& k) {
  return std::visit([](const auto& kk) { return kk.dim(); }, k);
}

double amplitude(const Kernel& k) {
  return std::visit([](const auto& kk) { return kk.amplitude(); }, k);
}

Eigen::MatrixXd gram(const Kernel& k, const std::vector<Eigen::VectorXd>& points) {
  const int n = static_cast<int>(points.size());
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      g(i, j) = eval(k, points[i], points[j]);
      g(j, i) = g(i, j);
    }
  }
  return g;
}

}  // namespace fwbq
