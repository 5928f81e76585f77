#include "fwbq/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <istream>
#include <sstream>
#include <string>
#include <utility>

#include "fwbq/errors.hpp"
#include "fwbq/mean_element.hpp"
#include "fwbq/selector.hpp"

namespace fwbq {
namespace {

// Seed-derivation contexts, one per independent random stream.  FW/FWBQ
// share one context (they are the same selection under different weights),
// as do FWLS/FWLSBQ; the RFF run reuses the FWLS context so exact and
// approximate selections see identical candidate pools.
constexpr std::uint64_t kCtxFwFamily = 1;
constexpr std::uint64_t kCtxFwlsFamily = 2;
constexpr std::uint64_t kCtxSbq = 3;
constexpr std::uint64_t kCtxMc = 4;
constexpr std::uint64_t kCtxRffDraw = 5;
constexpr std::uint64_t kCtxIntegrandCentres = 6;
constexpr std::uint64_t kCtxIntegrandCoeffs = 7;
constexpr std::uint64_t kCtxSyntheticData = 8;
constexpr std::uint64_t kCtxModelBase = 9;
constexpr std::uint64_t kCtxPropagation = 10;

using Clock = std::chrono::steady_clock;

double elapsedMillis(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::uint64_t familyContext(Method m) {
  switch (m) {
    case Method::FW:
    case Method::FWBQ:
      return kCtxFwFamily;
    case Method::FWLS:
    case Method::FWLSBQ:
      return kCtxFwlsFamily;
    case Method::SBQ:
      return kCtxSbq;
    case Method::MC:
      return kCtxMc;
  }
  throw InvalidInput("unknown method");
}

MeanElement meanElementFor(const TargetDensity& p, const Kernel& k) {
  if (const auto* mix = std::get_if<GaussianMixture>(&p)) {
    if (const auto* eq = std::get_if<EqKernel>(&k))
      return mixtureEqMeanElement(*mix, *eq);
    return rffMixtureMeanElement(*mix, std::get<RffKernel>(k));
  }
  if (const auto* eq = std::get_if<EqKernel>(&k)) {
    // The truncated target has a closed form only for the bare-exponent unit
    // kernel; other hyper-parameters fall back to the numerical oracle.
    if (eq->amplitude() == 1.0 && std::abs(eq->exponentScale() - 1.0) < 1e-12)
      return truncEqMeanElement(eq->dim());
    return numericMeanElement(p, k);
  }
  throw InvalidInput("random-feature kernels need a mixture target");
}

SelectionTrace selectFor(Method m, const TargetDensity& p, const Kernel& k,
                         const MeanElement& mu, const SelectionConfig& cfg) {
  switch (m) {
    case Method::FW:
    case Method::FWBQ:
      return fwSelect(p, k, mu, cfg);
    case Method::FWLS:
    case Method::FWLSBQ:
      return fwlsSelect(p, k, mu, cfg);
    case Method::SBQ:
      return sbqSelect(p, k, mu, cfg);
    case Method::MC:
      return mcSelect(p, cfg);
  }
  throw InvalidInput("unknown method");
}

// Known integrand for posterior-demo runs.
struct Truth {
  std::function<double(const Eigen::VectorXd&)> f;
  double integral = 0.0;
};

std::vector<Eigen::VectorXd> prefixOf(const std::vector<Eigen::VectorXd>& points,
                                      int n) {
  return {points.begin(), points.begin() + n};
}

// All rows for one method: select nMax points once, then evaluate every
// prefix on the size grid.  wallClockMillis is cumulative within the method
// (time from selection start until the row was finished).
std::vector<ResultRow> methodRows(Method m, const std::string& label,
                                  const TargetDensity& p, const Kernel& k,
                                  const MeanElement& mu, const std::vector<int>& grid,
                                  int poolSize, RngSeed selSeed, const Truth* truth) {
  const auto t0 = Clock::now();
  SelectionConfig scfg;
  scfg.pointCount = grid.back();
  scfg.poolSize = poolSize;
  scfg.seed = selSeed;
  const SelectionTrace trace = selectFor(m, p, k, mu, scfg);

  std::vector<ResultRow> rows;
  rows.reserve(grid.size());
  for (int n : grid) {
    ResultRow row;
    row.method = label;
    row.n = n;
    row.seed = selSeed.value;
    const auto prefix = prefixOf(trace.points, n);
    if (usesBqWeights(m)) {
      const auto pts = uniquePoints(prefix);
      const Eigen::VectorXd w = bqWeights(pts, k, mu);
      row.mmd2 = mmdSquared(QuadratureRule{pts, w, m}, k, mu);
      Eigen::VectorXd fv = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pts.size()));
      if (truth)
        for (std::size_t i = 0; i < pts.size(); ++i)
          fv[static_cast<Eigen::Index>(i)] = truth->f(pts[i]);
      const IntegralPosterior post = posterior(pts, fv, k, mu);
      row.posteriorVariance = post.variance;
      if (truth) {
        row.posteriorMean = post.mean;
        const double err = std::abs(post.mean - truth->integral);
        row.absError = err;
        row.coverage = err <= 1.96 * std::sqrt(post.variance);
      }
    } else {
      Eigen::VectorXd w;
      if (m == Method::MC) {
        w = Eigen::VectorXd::Constant(n, 1.0 / n);
      } else {
        w = fwWeights({trace.stepSizes.begin(), trace.stepSizes.begin() + n});
      }
      const QuadratureRule rule = mergeDuplicates(prefix, w, m);
      row.mmd2 = mmdSquared(rule, k, mu);
      if (truth) {
        Eigen::VectorXd fv(static_cast<Eigen::Index>(rule.points.size()));
        for (std::size_t i = 0; i < rule.points.size(); ++i)
          fv[static_cast<Eigen::Index>(i)] = truth->f(rule.points[i]);
        // Plug-in weighted estimate; reported in the same column as the BQ
        // posterior mean so the table keeps one estimate per row.
        const double est = apply(rule, fv);
        row.posteriorMean = est;
        row.absError = std::abs(est - truth->integral);
      }
    }
    row.wallClockMillis = elapsedMillis(t0);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Method> dedupe(const std::vector<Method>& methods) {
  std::vector<Method> unique;
  for (Method m : methods)
    if (std::find(unique.begin(), unique.end(), m) == unique.end())
      unique.push_back(m);
  return unique;
}

void sortRows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     if (a.method != b.method) return a.method < b.method;
                     return a.n < b.n;
                   });
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.methods.empty()) throw InvalidInput("at least one method is required");
  if (cfg.nMax < 1) throw InvalidInput("nMax must be at least 1");
  if (cfg.poolSize < 1) throw InvalidInput("poolSize must be at least 1");
  if (!(cfg.amplitude > 0.0) || !(cfg.lengthscale > 0.0))
    throw InvalidInput("kernel hyper-parameters must be positive");
}

std::vector<ResultRow> runRows(const ExperimentConfig& cfg, const Truth* truth) {
  validate(cfg);
  const Kernel kernel{EqKernel(cfg.amplitude, cfg.lengthscale, dim(cfg.density))};
  const MeanElement mu = meanElementFor(cfg.density, kernel);
  const auto grid = sizeGrid(cfg.nMax);

  std::vector<ResultRow> rows;
  for (Method m : dedupe(cfg.methods)) {
    const RngSeed selSeed = deriveSeed(cfg.seed, familyContext(m));
    auto part = methodRows(m, std::string(methodName(m)), cfg.density, kernel, mu,
                           grid, cfg.poolSize, selSeed, truth);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  sortRows(rows);
  return rows;
}

}  // namespace

std::vector<int> sizeGrid(int nMax) {
  if (nMax < 1) throw InvalidInput("nMax must be at least 1");
  std::vector<int> grid;
  static const int kTenths[6] = {10, 15, 20, 30, 50, 70};
  for (long long scale = 1;; scale *= 10) {
    for (int h : kTenths) {
      const long long tenthsValue = h * scale;
      if (tenthsValue % 10 != 0) continue;  // drops the non-integer 1.5
      const long long n = tenthsValue / 10;
      if (n > nMax) {
        if (grid.back() != nMax) grid.push_back(nMax);
        return grid;
      }
      grid.push_back(static_cast<int>(n));
    }
  }
}

std::vector<ResultRow> runConvergence(const ExperimentConfig& cfg) {
  return runRows(cfg, nullptr);
}

std::vector<ResultRow> runPosteriorDemo(const ExperimentConfig& cfg,
                                        const KernelCombination& f) {
  validate(cfg);
  const int d = dim(cfg.density);
  if (f.coeffs.size() != static_cast<Eigen::Index>(f.centres.size()))
    throw InvalidInput("one coefficient per centre is required");
  for (const auto& c : f.centres)
    if (c.size() != d) throw InvalidInput("integrand centre dimension mismatch");

  const Kernel kernel{EqKernel(cfg.amplitude, cfg.lengthscale, d)};
  const MeanElement mu = meanElementFor(cfg.density, kernel);

  Truth truth;
  truth.f = [centres = f.centres, coeffs = f.coeffs,
             kernel](const Eigen::VectorXd& x) {
    double v = 0.0;
    for (std::size_t j = 0; j < centres.size(); ++j)
      v += coeffs[static_cast<Eigen::Index>(j)] * eval(kernel, x, centres[j]);
    return v;
  };
  truth.integral = 0.0;
  for (std::size_t j = 0; j < f.centres.size(); ++j)
    truth.integral +=
        f.coeffs[static_cast<Eigen::Index>(j)] * mu.evaluate(f.centres[j]);

  return runRows(cfg, &truth);
}

std::vector<ResultRow> runRff(const ExperimentConfig& cfg, int featureCount) {
  validate(cfg);
  if (featureCount < 1) throw InvalidInput("featureCount must be at least 1");
  const auto* mix = std::get_if<GaussianMixture>(&cfg.density);
  if (!mix) throw InvalidInput("random-feature runs need a mixture target");

  // Exact-kernel rows come from the plain convergence path so the two tables
  // agree row for row under the same seed.
  ExperimentConfig exactCfg = cfg;
  exactCfg.methods = {Method::FWLS, Method::FWLSBQ};
  std::vector<ResultRow> rows = runConvergence(exactCfg);

  const int d = mix->dim();
  const Kernel exactKernel{EqKernel(cfg.amplitude, cfg.lengthscale, d)};
  const MeanElement exactMu = meanElementFor(cfg.density, exactKernel);
  const RffKernel rff = sampleRff(cfg.amplitude, cfg.lengthscale, d, featureCount,
                                  deriveSeed(cfg.seed, kCtxRffDraw));
  const Kernel rffKernel{rff};
  const MeanElement rffMu = rffMixtureMeanElement(*mix, rff);

  const auto grid = sizeGrid(cfg.nMax);
  const RngSeed selSeed = deriveSeed(cfg.seed, kCtxFwlsFamily);
  SelectionConfig scfg;
  scfg.pointCount = grid.back();
  scfg.poolSize = cfg.poolSize;
  scfg.seed = selSeed;

  const auto t0 = Clock::now();
  const SelectionTrace trace = fwlsSelect(cfg.density, rffKernel, rffMu, scfg);
  const std::string suffix = "-RFF" + std::to_string(featureCount);

  for (int n : grid) {
    const auto prefix = prefixOf(trace.points, n);

    // Frank-Wolfe weights from the approximate line search; error measured
    // in the exact kernel's norm.
    ResultRow fwRow;
    fwRow.method = std::string(methodName(Method::FWLS)) + suffix;
    fwRow.n = n;
    fwRow.seed = selSeed.value;
    const Eigen::VectorXd w =
        fwWeights({trace.stepSizes.begin(), trace.stepSizes.begin() + n});
    const QuadratureRule rule = mergeDuplicates(prefix, w, Method::FWLS);
    fwRow.mmd2 = mmdSquared(rule, exactKernel, exactMu);
    fwRow.wallClockMillis = elapsedMillis(t0);
    rows.push_back(std::move(fwRow));

    // BQ weights solved in the feature model; mmd2 again in the exact norm,
    // posteriorVariance in the feature model's own.
    ResultRow bqRow;
    bqRow.method = std::string(methodName(Method::FWLSBQ)) + suffix;
    bqRow.n = n;
    bqRow.seed = selSeed.value;
    const auto pts = uniquePoints(prefix);
    const Eigen::VectorXd wBq = bqWeights(pts, rffKernel, rffMu);
    bqRow.mmd2 = mmdSquared(QuadratureRule{pts, wBq, Method::FWLSBQ}, exactKernel,
                            exactMu);
    const Eigen::VectorXd zero =
        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pts.size()));
    bqRow.posteriorVariance = posterior(pts, zero, rffKernel, rffMu).variance;
    bqRow.wallClockMillis = elapsedMillis(t0);
    rows.push_back(std::move(bqRow));
  }
  sortRows(rows);
  return rows;
}

LongitudinalData modelSelectData(const ModelSelectConfig& cfg) {
  if (cfg.data) return *cfg.data;
  return makeSyntheticData(cfg.enzymeCount, cfg.timePointCount, cfg.noiseSd,
                           deriveSeed(cfg.seed, kCtxSyntheticData));
}

std::vector<ModelRow> runModelSelect(const ModelSelectConfig& cfg) {
  if (!usesBqWeights(cfg.method))
    throw InvalidInput("model selection needs a BQ-weighted method");
  if (cfg.nMax < 1) throw InvalidInput("nMax must be at least 1");
  if (cfg.poolSize < 1) throw InvalidInput("poolSize must be at least 1");
  if (cfg.sampleCount < 1) throw InvalidInput("sampleCount must be at least 1");

  const LongitudinalData data = modelSelectData(cfg);
  const auto models = enumerateModels(data.enzymeCount());

  std::vector<int> sizes = cfg.sizes ? *cfg.sizes : sizeGrid(cfg.nMax);
  if (sizes.empty()) throw InvalidInput("at least one design size is required");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1) throw InvalidInput("design sizes must be positive");
    if (i > 0 && sizes[i] <= sizes[i - 1])
      throw InvalidInput("design sizes must be ascending");
  }

  const RngSeed modelBase = deriveSeed(cfg.seed, kCtxModelBase);
  const RngSeed propBase = deriveSeed(cfg.seed, kCtxPropagation);

  std::vector<ModelRow> rows;
  rows.reserve(sizes.size() * models.size());
  for (int n : sizes) {
    std::vector<EvidencePosterior> perModel;
    perModel.reserve(models.size());
    for (std::size_t i = 0; i < models.size(); ++i)
      perModel.push_back(modelEvidence(data, models[i], cfg.method, n, cfg.poolSize,
                                       deriveSeed(modelBase, i)));
    const EvidenceSummary summary =
        propagate(perModel, cfg.sampleCount,
                  deriveSeed(propBase, static_cast<std::uint64_t>(n)));
    for (std::size_t i = 0; i < models.size(); ++i) {
      ModelRow row;
      row.n = n;
      row.model = models[i].label();
      row.mapStability = summary.mapStability;
      const auto idx = static_cast<Eigen::Index>(i);
      row.q2_5 = summary.quantiles(idx, 0);
      row.q25 = summary.quantiles(idx, 1);
      row.q50 = summary.quantiles(idx, 2);
      row.q75 = summary.quantiles(idx, 3);
      row.q97_5 = summary.quantiles(idx, 4);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

TargetDensity parseDensityConfig(std::istream& in) {
  std::string type;
  int d = 0;
  std::vector<GaussianMixture::Component> components;

  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::stringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    const std::string where = " (line " + std::to_string(lineNo) + ")";
    if (key == "type") {
      if (!(ss >> type) || (type != "mixture" && type != "truncated"))
        throw InvalidInput("type must be mixture or truncated" + where);
    } else if (key == "dim") {
      if (!(ss >> d) || d < 1) throw InvalidInput("dim must be a positive integer" + where);
    } else if (key == "component") {
      if (d < 1) throw InvalidInput("dim must come before component lines" + where);
      GaussianMixture::Component c;
      c.mean.resize(d);
      c.cov.resize(d, d);
      if (!(ss >> c.weight)) throw InvalidInput("component weight missing" + where);
      for (int i = 0; i < d; ++i)
        if (!(ss >> c.mean[i])) throw InvalidInput("component mean too short" + where);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          if (!(ss >> c.cov(i, j)))
            throw InvalidInput("component covariance too short" + where);
      std::string extra;
      if (ss >> extra) throw InvalidInput("trailing tokens on component line" + where);
      components.push_back(std::move(c));
    } else {
      throw InvalidInput("unknown directive '" + key + "'" + where);
    }
  }

  if (type.empty()) throw InvalidInput("density config needs a type line");
  if (d < 1) throw InvalidInput("density config needs a dim line");
  if (type == "truncated") {
    if (!components.empty())
      throw InvalidInput("truncated densities take no component lines");
    return TruncatedGaussian(d);
  }
  if (components.empty())
    throw InvalidInput("mixture densities need at least one component line");
  double total = 0.0;
  for (const auto& c : components) total += c.weight;
  if (!(total > 0.0)) throw InvalidInput("component weights must sum to a positive value");
  for (auto& c : components) c.weight /= total;  // configs may be unnormalised
  return GaussianMixture(std::move(components));
}

KernelCombination parseFunctionConfig(std::istream& in, int d) {
  if (d < 1) throw InvalidInput("dimension must be positive");
  KernelCombination f;
  std::vector<double> coeffs;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::stringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    const std::string where = " (line " + std::to_string(lineNo) + ")";
    if (key != "centre" && key != "center")
      throw InvalidInput("unknown directive '" + key + "'" + where);
    double coeff = 0.0;
    if (!(ss >> coeff)) throw InvalidInput("centre coefficient missing" + where);
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i)
      if (!(ss >> x[i])) throw InvalidInput("centre point too short" + where);
    std::string extra;
    if (ss >> extra) throw InvalidInput("trailing tokens on centre line" + where);
    coeffs.push_back(coeff);
    f.centres.push_back(std::move(x));
  }
  f.coeffs.resize(static_cast<Eigen::Index>(coeffs.size()));
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    f.coeffs[static_cast<Eigen::Index>(j)] = coeffs[j];
  return f;
}

GaussianMixture defaultBenchmarkMixture() {
  return makeRandomMixture(20, 2, RngSeed{42});
}

KernelCombination defaultIntegrand(const TargetDensity& p, RngSeed seed) {
  KernelCombination f;
  f.centres = sample(p, 5, deriveSeed(seed, kCtxIntegrandCentres));
  Rng rng(deriveSeed(seed, kCtxIntegrandCoeffs));
  f.coeffs.resize(static_cast<Eigen::Index>(f.centres.size()));
  for (Eigen::Index j = 0; j < f.coeffs.size(); ++j)
    f.coeffs[j] = rng.uniform(-2.0, 2.0);
  return f;
}

}  // namespace fwbq
