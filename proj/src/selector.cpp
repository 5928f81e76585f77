#include "fwbq/selector.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "fwbq/errors.hpp"

namespace fwbq {

namespace {

void validateConfig(const SelectionConfig& cfg, int d) {
  if (cfg.pointCount < 1) throw InvalidInput("pointCount must be positive");
  if (cfg.poolSize < 1) throw InvalidInput("poolSize must be positive");
  if (cfg.initialPoint && cfg.initialPoint->size() != d)
    throw InvalidInput("initial point dimension mismatch");
}

// Candidate scorer for one Frank-Wolfe iteration.  For finite-feature
// kernels the weighted kernel sum collapses to a single dot product against
// an accumulated feature vector, which keeps large-pool scans cheap.
std::function<double(const Eigen::VectorXd&)> makeAtomScorer(
    const std::vector<Eigen::VectorXd>& points, const Eigen::VectorXd& weights,
    const Kernel& k, const MeanElement& mu) {
  if (const auto* rff = std::get_if<RffKernel>(&k)) {
    const double scale = rff->amplitude() * rff->amplitude() / rff->featureCount();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(rff->featureCount());
    for (std::size_t l = 0; l < points.size(); ++l)
      acc += weights[static_cast<Eigen::Index>(l)] * rff->features(points[l]);
    acc *= scale;
    return [rff = *rff, acc, &mu](const Eigen::VectorXd& x) {
      return rff.features(x).dot(acc) - mu.evaluate(x);
    };
  }
  return [&points, &weights, &k, &mu](const Eigen::VectorXd& x) {
    double sum = 0.0;
    for (std::size_t l = 0; l < points.size(); ++l)
      sum += weights[static_cast<Eigen::Index>(l)] * eval(k, x, points[l]);
    return sum - mu.evaluate(x);
  };
}

// Argmin over the pool, ties broken by the lowest candidate index.
std::size_t argminIndex(const std::vector<Eigen::VectorXd>& pool,
                        const std::function<double(const Eigen::VectorXd&)>& score) {
  std::size_t best = 0;
  double bestValue = score(pool[0]);
  for (std::size_t i = 1; i < pool.size(); ++i) {
    const double v = score(pool[i]);
    if (v < bestValue) {
      bestValue = v;
      best = i;
    }
  }
  return best;
}

double bqVariance(const std::vector<Eigen::VectorXd>& points, const Kernel& k,
                  const MeanElement& mu) {
  const auto unique = uniquePoints(points);
  QuadratureRule rule{unique, bqWeights(unique, k, mu), Method::SBQ};
  return mmdSquared(rule, k, mu);
}

SelectionTrace fwCore(const TargetDensity& p, const Kernel& k, const MeanElement& mu,
                      const SelectionConfig& cfg, bool lineSearch) {
  validateConfig(cfg, dim(p));
  if (dim(p) != dim(k)) throw InvalidInput("density/kernel dimension mismatch");
  SelectionTrace trace;
  trace.method = lineSearch ? Method::FWLS : Method::FW;

  for (int i = 0; i < cfg.pointCount; ++i) {
    Eigen::VectorXd x;
    double rho;
    if (i == 0) {
      if (cfg.initialPoint) {
        x = *cfg.initialPoint;
      } else {
        const auto pool = sample(p, cfg.poolSize, deriveSeed(cfg.seed, 0));
        const auto idx = argminIndex(
            pool, [&mu](const Eigen::VectorXd& c) { return -mu.evaluate(c); });
        x = pool[idx];
      }
      rho = 1.0;
    } else {
      const auto pool = sample(p, cfg.poolSize, deriveSeed(cfg.seed, i));
      const Eigen::VectorXd w = fwWeights(trace.stepSizes);
      const auto scorer = makeAtomScorer(trace.points, w, k, mu);
      x = pool[argminIndex(pool, scorer)];
      if (lineSearch) {
        try {
          rho = fwlsStep(trace.points, w, x, k, mu);
        } catch (const DegenerateStep&) {
          rho = 0.0;  // atom coincides with the state; stay put
        }
      } else {
        rho = 1.0 / (i + 1);
      }
    }
    trace.points.push_back(std::move(x));
    trace.stepSizes.push_back(rho);
    const QuadratureRule rule{trace.points, fwWeights(trace.stepSizes), trace.method};
    trace.objective.push_back(0.5 * mmdSquared(rule, k, mu));
  }
  return trace;
}

}  // namespace

double atomObjective(const Eigen::VectorXd& x,
                     const std::vector<Eigen::VectorXd>& points,
                     const Eigen::VectorXd& weights, const Kernel& k,
                     const MeanElement& mu) {
  if (static_cast<Eigen::Index>(points.size()) != weights.size())
    throw InvalidInput("points/weights size mismatch");
  double sum = 0.0;
  for (std::size_t l = 0; l < points.size(); ++l)
    sum += weights[static_cast<Eigen::Index>(l)] * eval(k, x, points[l]);
  return sum - mu.evaluate(x);
}

double fwlsStep(const std::vector<Eigen::VectorXd>& points,
                const Eigen::VectorXd& weights, const Eigen::VectorXd& newPoint,
                const Kernel& k, const MeanElement& mu) {
  if (points.empty()) throw InvalidInput("line search needs a nonempty state");
  if (static_cast<Eigen::Index>(points.size()) != weights.size())
    throw InvalidInput("points/weights size mismatch");

  const Eigen::MatrixXd g = gram(k, points);
  const double stateNormSq = weights.dot(g * weights);
  double stateDotAtom = 0.0;   // <g, Phi(newPoint)>
  double stateDotMean = 0.0;   // <g, mu_p>
  for (std::size_t l = 0; l < points.size(); ++l) {
    const double w = weights[static_cast<Eigen::Index>(l)];
    stateDotAtom += w * eval(k, points[l], newPoint);
    stateDotMean += w * mu.evaluate(points[l]);
  }
  const double atomNormSq = eval(k, newPoint, newPoint);
  const double amp = amplitude(k);

  const double denominator = stateNormSq - 2.0 * stateDotAtom + atomNormSq;
  if (denominator < 1e-14 * amp * amp)
    throw DegenerateStep("new point coincides with the current state in feature space");
  const double numerator =
      stateNormSq - stateDotAtom - stateDotMean + mu.evaluate(newPoint);
  return std::clamp(numerator / denominator, 0.0, 1.0);
}

SelectionTrace fwSelect(const TargetDensity& p, const Kernel& k, const MeanElement& mu,
                        const SelectionConfig& cfg) {
  return fwCore(p, k, mu, cfg, false);
}

SelectionTrace fwlsSelect(const TargetDensity& p, const Kernel& k,
                          const MeanElement& mu, const SelectionConfig& cfg) {
  return fwCore(p, k, mu, cfg, true);
}

SelectionTrace sbqSelect(const TargetDensity& p, const Kernel& k, const MeanElement& mu,
                         const SelectionConfig& cfg) {
  validateConfig(cfg, dim(p));
  if (dim(p) != dim(k)) throw InvalidInput("density/kernel dimension mismatch");
  SelectionTrace trace;
  trace.method = Method::SBQ;
  const double amp = amplitude(k);

  for (int i = 0; i < cfg.pointCount; ++i) {
    Eigen::VectorXd x;
    if (i == 0 && cfg.initialPoint) {
      x = *cfg.initialPoint;
    } else if (i == 0) {
      // One-point variance p[mu_p] - mu_p(x)^2 / k(x,x): maximise the ratio.
      const auto pool = sample(p, cfg.poolSize, deriveSeed(cfg.seed, 0));
      const auto idx = argminIndex(pool, [&](const Eigen::VectorXd& c) {
        const double z = mu.evaluate(c);
        return -z * z / eval(k, c, c);
      });
      x = pool[idx];
    } else {
      const auto pool = sample(p, cfg.poolSize, deriveSeed(cfg.seed, i));
      const Eigen::MatrixXd g = gram(k, trace.points);
      const GramFactor factor = factorGram(g, amp * amp);
      Eigen::VectorXd z(static_cast<Eigen::Index>(trace.points.size()));
      for (std::size_t l = 0; l < trace.points.size(); ++l)
        z[l] = mu.evaluate(trace.points[l]);
      const Eigen::VectorXd c = factor.llt.solve(z);
      const Eigen::MatrixXd lower = factor.llt.matrixL();

      // Variance after adding candidate x drops by (mu(x) - k_x' c)^2 / schur;
      // pick the candidate with the largest drop.
      std::size_t best = 0;
      double bestDrop = -1.0;
      Eigen::VectorXd kx(z.size());
      for (std::size_t j = 0; j < pool.size(); ++j) {
        for (std::size_t l = 0; l < trace.points.size(); ++l)
          kx[l] = eval(k, pool[j], trace.points[l]);
        const Eigen::VectorXd a = lower.triangularView<Eigen::Lower>().solve(kx);
        const double schur =
            eval(k, pool[j], pool[j]) + factor.jitter - a.squaredNorm();
        if (schur <= 1e-14 * amp * amp) continue;  // numerically duplicate point
        const double excess = mu.evaluate(pool[j]) - kx.dot(c);
        const double drop = excess * excess / schur;
        if (drop > bestDrop) {
          bestDrop = drop;
          best = j;
        }
      }
      x = pool[best];
    }
    trace.points.push_back(std::move(x));
    trace.objective.push_back(bqVariance(trace.points, k, mu));
  }
  return trace;
}

SelectionTrace mcSelect(const TargetDensity& p, const SelectionConfig& cfg) {
  validateConfig(cfg, dim(p));
  SelectionTrace trace;
  trace.method = Method::MC;
  trace.points = sample(p, cfg.pointCount, deriveSeed(cfg.seed, 0));
  return trace;
}

}  // namespace fwbq
