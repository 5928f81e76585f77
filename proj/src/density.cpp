#include "fwbq/density.hpp"

#include <cmath>
#include <numbers>

#include "fwbq/errors.hpp"

namespace fwbq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

GaussianMixture::GaussianMixture(std::vector<Component> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw InvalidInput("mixture needs at least one component");
  dim_ = static_cast<int>(components_[0].mean.size());
  if (dim_ < 1) throw InvalidInput("mixture dimension must be positive");

  double weightSum = 0.0;
  for (const auto& c : components_) {
    if (c.mean.size() != dim_) throw InvalidInput("mixture component dimension mismatch");
    if (c.cov.rows() != dim_ || c.cov.cols() != dim_)
      throw InvalidInput("mixture covariance shape mismatch");
    if (!(c.weight > 0.0)) throw InvalidInput("mixture weights must be positive");
    const double asym = (c.cov - c.cov.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9 * (1.0 + c.cov.cwiseAbs().maxCoeff()))
      throw InvalidInput("mixture covariance must be symmetric");
    weightSum += c.weight;
  }
  if (std::abs(weightSum - 1.0) > 1e-6)
    throw InvalidInput("mixture weights must sum to 1");

  cholesky_.reserve(components_.size());
  logNorm_.reserve(components_.size());
  cumulativeWeight_.reserve(components_.size());
  double cum = 0.0;
  for (auto& c : components_) {
    c.weight /= weightSum;
    c.cov = ((c.cov + c.cov.transpose()) / 2.0).eval();
    Eigen::LLT<Eigen::MatrixXd> llt(c.cov);
    if (llt.info() != Eigen::Success)
      throw InvalidInput("mixture covariance must be positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    double logDetHalf = 0.0;
    for (int i = 0; i < dim_; ++i) logDetHalf += std::log(L(i, i));
    cholesky_.push_back(L);
    logNorm_.push_back(-0.5 * dim_ * std::log(kTwoPi) - logDetHalf);
    cum += c.weight;
    cumulativeWeight_.push_back(cum);
  }
  cumulativeWeight_.back() = 1.0;
}

GaussianMixture GaussianMixture::single(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  return GaussianMixture({Component{1.0, std::move(mean), std::move(cov)}});
}

double GaussianMixture::pdf(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw InvalidInput("pdf input dimension mismatch");
  double value = 0.0;
  for (std::size_t l = 0; l < components_.size(); ++l) {
    const Eigen::VectorXd y =
        cholesky_[l].triangularView<Eigen::Lower>().solve(x - components_[l].mean);
    value += components_[l].weight * std::exp(logNorm_[l] - 0.5 * y.squaredNorm());
  }
  return value;
}

std::vector<Eigen::VectorXd> GaussianMixture::sample(int count, RngSeed seed) const {
  if (count < 0) throw InvalidInput("sample count must be nonnegative");
  Rng rng(seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  Eigen::VectorXd noise(dim_);
  for (int i = 0; i < count; ++i) {
    const double u = rng.uniform();
    std::size_t l = 0;
    while (l + 1 < cumulativeWeight_.size() && u >= cumulativeWeight_[l]) ++l;
    for (int j = 0; j < dim_; ++j) noise[j] = rng.normal();
    out.push_back(components_[l].mean + cholesky_[l] * noise);
  }
  return out;
}

TruncatedGaussian::TruncatedGaussian(int dim) : dim_(dim) {
  if (dim < 1) throw InvalidInput("truncated Gaussian dimension must be positive");
}

double TruncatedGaussian::pdf(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw InvalidInput("pdf input dimension mismatch");
  // Per-axis normaliser: P(N(1, 1/2) >= 0) = (1 + erf(1)) / 2.
  static const double kAxisNorm =
      std::sqrt(kTwoPi * kVariance) * (1.0 + std::erf(1.0)) / 2.0;
  double value = 1.0;
  for (int i = 0; i < dim_; ++i) {
    if (x[i] < 0.0) return 0.0;
    const double t = x[i] - kLocation;
    value *= std::exp(-t * t / (2.0 * kVariance)) / kAxisNorm;
  }
  return value;
}

std::vector<Eigen::VectorXd> TruncatedGaussian::sample(int count, RngSeed seed) const {
  if (count < 0) throw InvalidInput("sample count must be nonnegative");
  Rng rng(seed);
  const double sd = std::sqrt(kVariance);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd x(dim_);
    for (int j = 0; j < dim_; ++j) {
      double u;
      int tries = 0;
      do {
        u = kLocation + sd * rng.normal();
        if (++tries > 10000)
          throw ConvergenceFailure("truncated Gaussian rejection sampler stalled", 0.0);
      } while (u < 0.0);
      x[j] = u;
    }
    out.push_back(std::move(x));
  }
  return out;
}

int dim(const TargetDensity& p) {
  return std::visit([](const auto& d) { return d.dim(); }, p);
}

double pdf(const TargetDensity& p, const Eigen::VectorXd& x) {
  return std::visit([&](const auto& d) { return d.pdf(x); }, p);
}

std::vector<Eigen::VectorXd> sample(const TargetDensity& p, int count, RngSeed seed) {
  return std::visit([&](const auto& d) { return d.sample(count, seed); }, p);
}

GaussianMixture makeRandomMixture(int componentCount, int dim, RngSeed seed) {
  if (componentCount < 1) throw InvalidInput("componentCount must be positive");
  if (dim < 1) throw InvalidInput("dim must be positive");
  Rng rng(seed);
  std::vector<GaussianMixture::Component> comps(componentCount);
  double weightSum = 0.0;
  for (auto& c : comps) {
    c.weight = rng.uniform(0.5, 1.5);
    weightSum += c.weight;
    c.mean = Eigen::VectorXd(dim);
    for (int j = 0; j < dim; ++j) c.mean[j] = rng.uniform(-1.0, 1.0);
    Eigen::MatrixXd a(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int q = 0; q < dim; ++q) a(r, q) = rng.uniform(-0.5, 0.5);
    c.cov = a * a.transpose() + 0.05 * Eigen::MatrixXd::Identity(dim, dim);
  }
  for (auto& c : comps) c.weight /= weightSum;
  return GaussianMixture(std::move(comps));
}

}  // namespace fwbq
