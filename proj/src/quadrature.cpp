#include "fwbq/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fwbq/errors.hpp"

namespace fwbq {

namespace {

constexpr double kNegativeMmdSlack = 1e-10;  // times amplitude^2

double normalCdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

void checkDistinct(const std::vector<Eigen::VectorXd>& points) {
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i] == points[j])
        throw InvalidInput("points must be pairwise distinct; merge duplicates first");
}

Eigen::VectorXd meanElementValues(const std::vector<Eigen::VectorXd>& points,
                                  const MeanElement& mu) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) z[i] = mu.evaluate(points[i]);
  return z;
}

double mmdSquaredRaw(const std::vector<Eigen::VectorXd>& points,
                     const Eigen::VectorXd& weights, const Kernel& k,
                     const MeanElement& mu) {
  const Eigen::VectorXd z = meanElementValues(points, mu);
  const Eigen::MatrixXd g = gram(k, points);
  const double value =
      mu.initialError - 2.0 * weights.dot(z) + weights.dot(g * weights);
  if (value < 0.0) {
    const double amp = amplitude(k);
    if (value < -kNegativeMmdSlack * amp * amp)
      throw NumericalInconsistency("squared MMD came out negative beyond roundoff");
    return 0.0;
  }
  return value;
}

}  // namespace

std::string_view methodName(Method m) {
  switch (m) {
    case Method::MC: return "MC";
    case Method::FW: return "FW";
    case Method::FWLS: return "FWLS";
    case Method::FWBQ: return "FWBQ";
    case Method::FWLSBQ: return "FWLSBQ";
    case Method::SBQ: return "SBQ";
  }
  throw InvalidInput("unknown method");
}

Method parseMethod(std::string_view name) {
  for (Method m : {Method::MC, Method::FW, Method::FWLS, Method::FWBQ,
                   Method::FWLSBQ, Method::SBQ})
    if (name == methodName(m)) return m;
  throw InvalidInput("unknown method name: " + std::string(name));
}

bool usesBqWeights(Method m) {
  return m == Method::FWBQ || m == Method::FWLSBQ || m == Method::SBQ;
}

bool usesLineSearch(Method m) { return m == Method::FWLS || m == Method::FWLSBQ; }

Eigen::VectorXd fwWeights(const std::vector<double>& stepSizes) {
  const auto n = static_cast<Eigen::Index>(stepSizes.size());
  Eigen::VectorXd w(n);
  if (n == 0) return w;
  if (stepSizes[0] != 1.0)
    throw InvalidInput("first Frank-Wolfe step size must be exactly 1");
  for (double rho : stepSizes)
    if (!(rho >= 0.0 && rho <= 1.0))
      throw InvalidInput("Frank-Wolfe step sizes must lie in [0, 1]");
  double suffix = 1.0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    w[i] = stepSizes[static_cast<std::size_t>(i)] * suffix;
    suffix *= 1.0 - stepSizes[static_cast<std::size_t>(i)];
  }
  return w;
}

GramFactor factorGram(const Eigen::MatrixXd& gramMatrix, double amplitudeSq) {
  const Eigen::Index n = gramMatrix.rows();
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd shifted = gramMatrix;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) return GramFactor{std::move(llt), jitter};
    if (jitter == 0.0)
      jitter = 1e-10 * amplitudeSq;
    else if (jitter < 0.99e-4 * amplitudeSq)
      jitter *= 10.0;
    else
      break;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gramMatrix);
  double cond = std::numeric_limits<double>::infinity();
  if (eig.info() == Eigen::Success && n > 0) {
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = std::abs(eig.eigenvalues().minCoeff());
    cond = lmax / std::max(lmin, 2.2e-16 * std::max(lmax, amplitudeSq));
  }
  throw IllConditionedGram("gram factorisation failed at maximum jitter", cond);
}

Eigen::VectorXd bqWeights(const std::vector<Eigen::VectorXd>& points, const Kernel& k,
                          const MeanElement& mu) {
  if (points.empty()) throw InvalidInput("need at least one point");
  checkDistinct(points);
  const double amp = amplitude(k);
  const GramFactor factor = factorGram(gram(k, points), amp * amp);
  return factor.llt.solve(meanElementValues(points, mu));
}

double apply(const QuadratureRule& rule, const Eigen::VectorXd& fValues) {
  if (fValues.size() != rule.weights.size())
    throw InvalidInput("rule/function value size mismatch");
  return rule.weights.dot(fValues);
}

double mmdSquared(const QuadratureRule& rule, const Kernel& k, const MeanElement& mu) {
  if (static_cast<Eigen::Index>(rule.points.size()) != rule.weights.size())
    throw InvalidInput("rule points/weights size mismatch");
  if (rule.points.empty()) return mu.initialError;
  return mmdSquaredRaw(rule.points, rule.weights, k, mu);
}

IntegralPosterior posterior(const std::vector<Eigen::VectorXd>& points,
                            const Eigen::VectorXd& fValues, const Kernel& k,
                            const MeanElement& mu) {
  if (static_cast<Eigen::Index>(points.size()) != fValues.size())
    throw InvalidInput("points/function value size mismatch");
  if (points.empty()) return IntegralPosterior{0.0, mu.initialError};
  const Eigen::VectorXd w = bqWeights(points, k, mu);
  return IntegralPosterior{w.dot(fValues), mmdSquaredRaw(points, w, k, mu)};
}

double contractionMass(const IntegralPosterior& post, double lo, double hi) {
  if (!(lo < hi)) throw InvalidInput("interval must be nonempty");
  if (post.variance < 0.0) throw InvalidInput("posterior variance must be nonnegative");
  const double sd = std::sqrt(post.variance);
  if (sd == 0.0) return (post.mean > lo && post.mean < hi) ? 0.0 : 1.0;
  double mass = 0.0;
  if (std::isfinite(lo)) mass += normalCdf((lo - post.mean) / sd);
  if (std::isfinite(hi)) mass += normalCdf((post.mean - hi) / sd);
  return std::clamp(mass, 0.0, 1.0);
}

ContractionBound contractionBound(double gamma, double sigmaN) {
  if (!(gamma > 0.0)) throw InvalidInput("gamma must be positive");
  if (!(sigmaN > 0.0)) throw InvalidInput("sigma must be positive");
  const double ratio = gamma / (std::numbers::sqrt2 * sigmaN);
  const double exact = std::erfc(ratio);
  const double asymptotic = std::numbers::sqrt2 * sigmaN /
                            (std::sqrt(std::numbers::pi) * gamma) *
                            std::exp(-ratio * ratio);
  return ContractionBound{exact, asymptotic};
}

QuadratureRule mergeDuplicates(const std::vector<Eigen::VectorXd>& points,
                               const Eigen::VectorXd& weights, Method method) {
  if (static_cast<Eigen::Index>(points.size()) != weights.size())
    throw InvalidInput("points/weights size mismatch");
  QuadratureRule rule;
  rule.method = method;
  std::vector<double> merged;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool found = false;
    for (std::size_t j = 0; j < rule.points.size(); ++j) {
      if (rule.points[j] == points[i]) {
        merged[j] += weights[static_cast<Eigen::Index>(i)];
        found = true;
        break;
      }
    }
    if (!found) {
      rule.points.push_back(points[i]);
      merged.push_back(weights[static_cast<Eigen::Index>(i)]);
    }
  }
  rule.weights = Eigen::Map<Eigen::VectorXd>(merged.data(),
                                             static_cast<Eigen::Index>(merged.size()));
  return rule;
}

std::vector<Eigen::VectorXd> uniquePoints(const std::vector<Eigen::VectorXd>& points) {
  std::vector<Eigen::VectorXd> unique;
  for (const auto& p : points) {
    bool found = false;
    for (const auto& q : unique)
      if (p == q) {
        found = true;
        break;
      }
    if (!found) unique.push_back(p);
  }
  return unique;
}

}  // namespace fwbq
