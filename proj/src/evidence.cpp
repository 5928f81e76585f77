#include "fwbq/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fwbq/density.hpp"
#include "fwbq/errors.hpp"
#include "fwbq/number_format.hpp"
#include "fwbq/selector.hpp"

namespace fwbq {

void LongitudinalData::validate() const {
  const Eigen::Index n = times.size();
  if (n < 2) throw InvalidInput("need at least two time points");
  if (substrate.size() != n || substratePhos.size() != n || enzymePhos.rows() != n)
    throw InvalidInput("series lengths must match the time grid");
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(times[i] > times[i - 1])) throw InvalidInput("times must strictly increase");
  auto nonneg = [](double v) { return v >= 0.0 && std::isfinite(v); };
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!nonneg(substrate[i]) || !nonneg(substratePhos[i]))
      throw InvalidInput("abundances must be finite and nonnegative");
    for (Eigen::Index j = 0; j < enzymePhos.cols(); ++j)
      if (!nonneg(enzymePhos(i, j)))
        throw InvalidInput("abundances must be finite and nonnegative");
  }
}

std::string CandidateModel::label() const {
  if (enzymes.empty()) return "none";
  std::string s = "E" + std::to_string(enzymes[0] + 1);
  for (std::size_t i = 1; i < enzymes.size(); ++i)
    s += "+E" + std::to_string(enzymes[i] + 1);
  return s;
}

std::vector<CandidateModel> enumerateModels(int enzymeCount) {
  if (enzymeCount < 0) throw InvalidInput("enzymeCount must be nonnegative");
  std::vector<CandidateModel> models;
  models.push_back(CandidateModel{});
  for (int j = 0; j < enzymeCount; ++j) models.push_back(CandidateModel{{j}});
  for (int j = 0; j < enzymeCount; ++j)
    for (int l = j + 1; l < enzymeCount; ++l) models.push_back(CandidateModel{{j, l}});
  return models;
}

namespace {

void validateModel(const LongitudinalData& data, const CandidateModel& model) {
  if (model.enzymes.size() > 2) throw InvalidInput("models carry at most two enzymes");
  for (std::size_t i = 0; i < model.enzymes.size(); ++i) {
    if (model.enzymes[i] < 0 || model.enzymes[i] >= data.enzymeCount())
      throw InvalidInput("model enzyme index out of range");
    if (i > 0 && model.enzymes[i] <= model.enzymes[i - 1])
      throw InvalidInput("model enzymes must be strictly increasing");
  }
}

}  // namespace

DesignSystem buildDesign(const LongitudinalData& data, const CandidateModel& model,
                         const Eigen::VectorXd& k) {
  data.validate();
  validateModel(data, model);
  const int d = model.paramCount();
  if (k.size() != d) throw InvalidInput("saturation-constant vector has wrong length");
  for (int i = 0; i < d; ++i)
    if (!(k[i] > 0.0)) throw InvalidInput("saturation constants must be positive");

  const Eigen::Index rows = data.times.size() - 1;
  DesignSystem sys;
  sys.y.resize(rows);
  sys.x.resize(rows, d);
  for (Eigen::Index n = 0; n < rows; ++n) {
    const double dt = data.times[n + 1] - data.times[n];
    sys.y[n] = (data.substratePhos[n + 1] - data.substratePhos[n]) / dt;
    sys.x(n, 0) = -data.substratePhos[n] / (data.substratePhos[n] + k[0]);
    for (int j = 0; j < static_cast<int>(model.enzymes.size()); ++j) {
      const double enzyme = data.enzymePhos(n, model.enzymes[j]);
      sys.x(n, 1 + j) =
          enzyme * data.substrate[n] / (data.substrate[n] + k[1 + j]);
    }
  }
  return sys;
}

double logConditionalEvidence(const LongitudinalData& data, const CandidateModel& model,
                              const Eigen::VectorXd& k) {
  const DesignSystem sys = buildDesign(data, model, k);
  const Eigen::Index bigN = sys.y.size();
  const int d = model.paramCount();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sys.x);
  if (qr.rank() < d) throw IllPosedDesign("regression design is rank deficient");

  const double n = static_cast<double>(bigN);
  const Eigen::MatrixXd xtx = sys.x.transpose() * sys.x;
  const Eigen::MatrixXd omega = (1.0 + 1.0 / n) * xtx;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d);
  const Eigen::VectorXd rhs = xtx * ones / n + sys.x.transpose() * sys.y;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(omega);
  if (ldlt.info() != Eigen::Success)
    throw IllPosedDesign("prior-weighted normal matrix could not be factorised");
  const Eigen::VectorXd vn = ldlt.solve(rhs);
  const double b =
      0.5 * (sys.y.squaredNorm() + ones.dot(xtx * ones) / n - vn.dot(omega * vn));
  if (!(b > 0.0))
    throw NumericalInconsistency("posterior scale b_N must be positive");

  return -0.5 * n * std::log(2.0 * std::numbers::pi) -
         0.5 * d * std::log(n + 1.0) + std::lgamma(0.5 * n) - 0.5 * n * std::log(b);
}

double conditionalEvidence(const LongitudinalData& data, const CandidateModel& model,
                           const Eigen::VectorXd& k) {
  return std::exp(logConditionalEvidence(data, model, k));
}

EvidencePosterior integrateLogPosterior(
    const std::function<double(const Eigen::VectorXd&)>& logF, int d, Method method,
    int pointCount, int poolSize, RngSeed seed) {
  if (!usesBqWeights(method))
    throw InvalidInput("evidence integration needs a BQ-weighted method");
  const TargetDensity prior{TruncatedGaussian(d)};
  const Kernel kernel{EqKernel::withExponentScale(1.0, 1.0, d)};
  const MeanElement mu = truncEqMeanElement(d);

  SelectionConfig cfg;
  cfg.pointCount = pointCount;
  cfg.poolSize = poolSize;
  cfg.seed = seed;
  SelectionTrace trace;
  switch (method) {
    case Method::FWBQ: trace = fwSelect(prior, kernel, mu, cfg); break;
    case Method::FWLSBQ: trace = fwlsSelect(prior, kernel, mu, cfg); break;
    default: trace = sbqSelect(prior, kernel, mu, cfg); break;
  }

  const auto points = uniquePoints(trace.points);
  Eigen::VectorXd logValues(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) logValues[i] = logF(points[i]);
  const double logScale = logValues.maxCoeff();
  if (!std::isfinite(logScale))
    throw NumericalInconsistency("integrand log-values are not finite");
  const Eigen::VectorXd values = (logValues.array() - logScale).exp();
  return EvidencePosterior{posterior(points, values, kernel, mu), logScale};
}

EvidencePosterior modelEvidence(const LongitudinalData& data,
                                const CandidateModel& model, Method method,
                                int pointCount, int poolSize, RngSeed seed) {
  auto logF = [&data, &model](const Eigen::VectorXd& k) {
    return logConditionalEvidence(data, model, k);
  };
  return integrateLogPosterior(logF, model.paramCount(), method, pointCount, poolSize,
                               seed);
}

EvidenceSummary propagate(const std::vector<EvidencePosterior>& perModel,
                          int sampleCount, RngSeed seed) {
  const int models = static_cast<int>(perModel.size());
  if (models < 1) throw InvalidInput("need at least one model");
  if (sampleCount < 1) throw InvalidInput("sampleCount must be positive");
  double maxScale = perModel[0].logScale;
  for (const auto& m : perModel) maxScale = std::max(maxScale, m.logScale);

  Rng rng(seed);
  Eigen::MatrixXd probs(sampleCount, models);
  std::vector<int> mapCounts(models, 0);
  const long maxAttempts = 100L * sampleCount;
  long attempts = 0;
  int accepted = 0;
  Eigen::VectorXd draw(models);
  while (accepted < sampleCount) {
    if (attempts >= maxAttempts)
      throw DegeneratePosterior(
          "evidence sampling rejected more than 99% of draws; posteriors put "
          "almost all mass at nonpositive values");
    ++attempts;
    bool ok = true;
    for (int m = 0; m < models; ++m) {
      const double v = perModel[m].posterior.mean +
                       std::sqrt(perModel[m].posterior.variance) * rng.normal();
      const double scaled = v * std::exp(perModel[m].logScale - maxScale);
      if (!(scaled > 0.0)) {
        ok = false;
        break;
      }
      draw[m] = scaled;
    }
    if (!ok) continue;
    probs.row(accepted) = draw.transpose() / draw.sum();
    int argmax = 0;
    for (int m = 1; m < models; ++m)
      if (draw[m] > draw[argmax]) argmax = m;
    ++mapCounts[argmax];
    ++accepted;
  }

  EvidenceSummary summary;
  summary.acceptedFraction = static_cast<double>(accepted) / attempts;
  summary.modalMap = static_cast<int>(
      std::max_element(mapCounts.begin(), mapCounts.end()) - mapCounts.begin());
  summary.mapStability =
      static_cast<double>(mapCounts[summary.modalMap]) / sampleCount;

  const double levels[5] = {0.025, 0.25, 0.5, 0.75, 0.975};
  summary.quantiles.resize(models, 5);
  std::vector<double> column(sampleCount);
  for (int m = 0; m < models; ++m) {
    for (int s = 0; s < sampleCount; ++s) column[s] = probs(s, m);
    std::sort(column.begin(), column.end());
    for (int q = 0; q < 5; ++q) {
      const double pos = levels[q] * (sampleCount - 1);
      const auto lo = static_cast<std::size_t>(pos);
      const auto hi = std::min(lo + 1, static_cast<std::size_t>(sampleCount - 1));
      const double frac = pos - static_cast<double>(lo);
      summary.quantiles(m, q) = (1.0 - frac) * column[lo] + frac * column[hi];
    }
  }
  return summary;
}

LongitudinalData makeSyntheticData(int enzymeCount, int timePointCount, double noiseSd,
                                   RngSeed seed) {
  // The simulated truth is an enzyme pair, so two candidates are the minimum.
  if (enzymeCount < 2) throw InvalidInput("enzymeCount must be at least 2");
  if (timePointCount < 2) throw InvalidInput("need at least two time points");
  if (!(noiseSd >= 0.0)) throw InvalidInput("noiseSd must be nonnegative");

  for (int attempt = 0; attempt < 100; ++attempt) {
    Rng rng(deriveSeed(seed, static_cast<std::uint64_t>(attempt)));
    LongitudinalData data;
    data.times.resize(timePointCount);
    data.substrate.resize(timePointCount);
    data.substratePhos.resize(timePointCount);
    data.enzymePhos.resize(timePointCount, enzymeCount);

    const double horizon = 2.0;
    for (int i = 0; i < timePointCount; ++i)
      data.times[i] = horizon * i / (timePointCount - 1);

    // Smooth positive time courses. Cycle through four qualitatively different
    // shapes so no two enzyme profiles are near-proportional; near-collinear
    // regression columns would leave ridge-shaped likelihoods that no finite
    // design can distinguish.
    std::vector<double> level(enzymeCount), rate(enzymeCount), base(enzymeCount),
        onset(enzymeCount);
    for (int j = 0; j < enzymeCount; ++j) {
      level[j] = rng.uniform(0.4, 1.6);
      rate[j] = rng.uniform(0.5, 2.5);
      base[j] = rng.uniform(0.05, 0.3);
      onset[j] = rng.uniform(0.4, 1.2);
    }
    const double substrateBase = rng.uniform(0.2, 0.5);
    for (int i = 0; i < timePointCount; ++i) {
      const double t = data.times[i];
      data.substrate[i] = substrateBase + 1.5 * std::exp(-0.6 * t);
      for (int j = 0; j < enzymeCount; ++j) {
        double shape;
        switch (j % 4) {
          case 0: shape = 1.0 - std::exp(-rate[j] * t); break;
          case 1: shape = std::exp(-rate[j] * t); break;
          case 2: shape = rate[j] * t * std::exp(1.0 - rate[j] * t); break;
          default: shape = 1.0 / (1.0 + std::exp(-4.0 * rate[j] * (t - onset[j])));
        }
        data.enzymePhos(i, j) = base[j] + level[j] * shape;
      }
    }

    // True model: one enzyme pair; kinetic parameters from the prior.
    const auto models = enumerateModels(enzymeCount);
    std::vector<int> pairIndex;
    for (int m = 0; m < static_cast<int>(models.size()); ++m)
      if (models[m].enzymes.size() == 2) pairIndex.push_back(m);
    const auto& truth =
        models[pairIndex[static_cast<std::size_t>(rng.uniform() * pairIndex.size())]];
    const int d = truth.paramCount();
    auto truncDraw = [&rng]() {
      double v;
      do v = 1.0 + std::sqrt(0.5) * rng.normal();
      while (v < 0.0);
      return v;
    };
    Eigen::VectorXd kTrue(d), vTrue(d);
    for (int i = 0; i < d; ++i) {
      kTrue[i] = truncDraw();
      vTrue[i] = truncDraw();
    }

    data.substratePhos[0] = 1.2;
    bool positive = true;
    for (int n = 0; n + 1 < timePointCount; ++n) {
      const double ys = data.substratePhos[n];
      double rateValue = -vTrue[0] * ys / (ys + kTrue[0]);
      for (int j = 0; j < static_cast<int>(truth.enzymes.size()); ++j) {
        const double enzyme = data.enzymePhos(n, truth.enzymes[j]);
        rateValue += vTrue[1 + j] * enzyme * data.substrate[n] /
                     (data.substrate[n] + kTrue[1 + j]);
      }
      rateValue += noiseSd * rng.normal();
      const double dt = data.times[n + 1] - data.times[n];
      data.substratePhos[n + 1] = ys + dt * rateValue;
      if (data.substratePhos[n + 1] < 0.05) {
        positive = false;
        break;
      }
    }
    if (!positive) continue;
    data.validate();
    return data;
  }
  throw ConvergenceFailure("could not simulate a positive phospho-substrate series",
                           0.0);
}

LongitudinalData readLongitudinalData(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("empty data stream");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[0] != "time" || header[1] != "yS" ||
      header[2] != "ySstar")
    throw InvalidInput("expected header time,yS,ySstar,yE1star,...");
  const int enzymes = static_cast<int>(header.size()) - 3;
  for (int j = 0; j < enzymes; ++j) {
    const std::string want = "yE" + std::to_string(j + 1) + "star";
    if (header[3 + static_cast<std::size_t>(j)] != want)
      throw InvalidInput("expected enzyme column " + want);
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(parseDouble(cell));
    if (row.size() != header.size())
      throw InvalidInput("row width does not match header");
    rows.push_back(std::move(row));
  }

  LongitudinalData data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  data.times.resize(n);
  data.substrate.resize(n);
  data.substratePhos.resize(n);
  data.enzymePhos.resize(n, enzymes);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.times[i] = rows[i][0];
    data.substrate[i] = rows[i][1];
    data.substratePhos[i] = rows[i][2];
    for (int j = 0; j < enzymes; ++j) data.enzymePhos(i, j) = rows[i][3 + j];
  }
  data.validate();
  return data;
}

void writeLongitudinalData(const LongitudinalData& data, std::ostream& out) {
  data.validate();
  out << "time,yS,ySstar";
  for (int j = 0; j < data.enzymeCount(); ++j) out << ",yE" << (j + 1) << "star";
  out << "\n";
  for (Eigen::Index i = 0; i < data.times.size(); ++i) {
    out << formatShortest(data.times[i]) << "," << formatShortest(data.substrate[i])
        << "," << formatShortest(data.substratePhos[i]);
    for (int j = 0; j < data.enzymeCount(); ++j)
      out << "," << formatShortest(data.enzymePhos(i, j));
    out << "\n";
  }
}

}  // namespace fwbq
