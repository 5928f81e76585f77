#include "fwbq/mean_element.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <utility>
#include <vector>

#include "fwbq/errors.hpp"
#include "fwbq/gauss_kronrod.hpp"

namespace fwbq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double gaussianPdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                   const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericalInconsistency("covariance in mean-element formula not SPD");
  const Eigen::MatrixXd L = llt.matrixL();
  double logDetHalf = 0.0;
  for (int i = 0; i < x.size(); ++i) logDetHalf += std::log(L(i, i));
  const Eigen::VectorXd y = L.triangularView<Eigen::Lower>().solve(x - mean);
  return std::exp(-0.5 * x.size() * std::log(kTwoPi) - logDetHalf -
                  0.5 * y.squaredNorm());
}

// Axis box outside of which the density carries negligible mass (~8 sd).
std::vector<std::pair<double, double>> massBox(const TargetDensity& p) {
  const int d = dim(p);
  std::vector<std::pair<double, double>> box(d);
  if (std::holds_alternative<TruncatedGaussian>(p)) {
    const double hi = TruncatedGaussian::kLocation +
                      8.0 * std::sqrt(TruncatedGaussian::kVariance);
    for (int i = 0; i < d; ++i) box[i] = {0.0, hi};
    return box;
  }
  const auto& mix = std::get<GaussianMixture>(p);
  for (int i = 0; i < d; ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : mix.components()) {
      const double sd = std::sqrt(c.cov(i, i));
      lo = std::min(lo, c.mean[i] - 8.0 * sd);
      hi = std::max(hi, c.mean[i] + 8.0 * sd);
    }
    box[i] = {lo, hi};
  }
  return box;
}

// Nested (tensorised) adaptive quadrature of F over an axis-aligned box.
// Each level gets an absolute tolerance budget that accounts for the outer
// widths its error will be integrated over.
double integrateBox(const std::function<double(const Eigen::VectorXd&)>& F,
                    const std::vector<std::pair<double, double>>& box, double absTol) {
  const int d = static_cast<int>(box.size());
  std::vector<double> levelTol(d);
  double widthProduct = 1.0;
  for (int j = 0; j < d; ++j) {
    levelTol[j] = 0.5 * absTol / (d * widthProduct);
    widthProduct *= box[j].second - box[j].first;
  }
  Eigen::VectorXd x(d);
  std::function<double(int)> level = [&](int j) -> double {
    const auto res = integrateAdaptive(
        [&](double t) {
          x[j] = t;
          return j + 1 == d ? F(x) : level(j + 1);
        },
        box[j].first, box[j].second, levelTol[j]);
    return res.value;
  };
  return level(0);
}

}  // namespace

MeanElement mixtureEqMeanElement(const GaussianMixture& p, const EqKernel& k) {
  if (p.dim() != k.dim()) throw InvalidInput("density/kernel dimension mismatch");
  const int d = p.dim();
  const double s2 = k.lengthscale() * k.lengthscale();
  const double factor = k.amplitude() * k.amplitude() *
                        std::pow(kTwoPi * s2, 0.5 * d);

  struct State {
    double factor;
    std::vector<double> weights;
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> chol;     // of Sigma_l + s^2 I
    std::vector<double> logNorm;
  };
  auto st = std::make_shared<State>();
  st->factor = factor;
  const Eigen::MatrixXd bump = s2 * Eigen::MatrixXd::Identity(d, d);
  for (const auto& c : p.components()) {
    Eigen::LLT<Eigen::MatrixXd> llt(c.cov + bump);
    if (llt.info() != Eigen::Success)
      throw NumericalInconsistency("smoothed covariance not SPD");
    const Eigen::MatrixXd L = llt.matrixL();
    double logDetHalf = 0.0;
    for (int i = 0; i < d; ++i) logDetHalf += std::log(L(i, i));
    st->weights.push_back(c.weight);
    st->means.push_back(c.mean);
    st->chol.push_back(L);
    st->logNorm.push_back(-0.5 * d * std::log(kTwoPi) - logDetHalf);
  }

  double initial = 0.0;
  const auto& comps = p.components();
  for (std::size_t l = 0; l < comps.size(); ++l)
    for (std::size_t m = 0; m < comps.size(); ++m)
      initial += comps[l].weight * comps[m].weight *
                 gaussianPdf(comps[l].mean, comps[m].mean,
                             comps[l].cov + comps[m].cov + bump);
  initial *= factor;

  auto evaluate = [st, d](const Eigen::VectorXd& x) {
    if (x.size() != d) throw InvalidInput("mean element input dimension mismatch");
    double value = 0.0;
    for (std::size_t l = 0; l < st->weights.size(); ++l) {
      const Eigen::VectorXd y =
          st->chol[l].triangularView<Eigen::Lower>().solve(x - st->means[l]);
      value += st->weights[l] * std::exp(st->logNorm[l] - 0.5 * y.squaredNorm());
    }
    return st->factor * value;
  };
  return MeanElement{std::move(evaluate), initial, MeanElement::Provenance::Analytic};
}

MeanElement truncEqMeanElement(int dim) {
  if (dim < 1 || dim > 3)
    throw InvalidInput("truncated-Gaussian mean element available for dim 1..3 only");
  // Squared norms p[mu_p] for dim = 1, 2, 3 under the bare-exponent kernel;
  // the per-axis factor is 0.629908394588042 and the norm is its dim-th power.
  static constexpr double kInitial[3] = {0.6299083945880420, 0.3967845855724844,
                                         0.2499379412952452};
  auto evaluate = [dim](const Eigen::VectorXd& x) {
    if (x.size() != dim) throw InvalidInput("mean element input dimension mismatch");
    static const double kDen = std::numbers::sqrt2 * (1.0 + std::erf(1.0));
    double value = 1.0;
    for (int i = 0; i < dim; ++i) {
      const double t = x[i];
      value *= std::exp(-0.5 * (t - 1.0) * (t - 1.0)) *
               (1.0 + std::erf((t + 1.0) / std::numbers::sqrt2)) / kDen;
    }
    return value;
  };
  return MeanElement{std::move(evaluate), kInitial[dim - 1],
                     MeanElement::Provenance::Analytic};
}

MeanElement rffMixtureMeanElement(const GaussianMixture& p, const RffKernel& k) {
  if (p.dim() != k.dim()) throw InvalidInput("density/kernel dimension mismatch");
  const int dCount = k.featureCount();
  // Expected feature vector under p via the Gaussian characteristic function.
  Eigen::VectorXd m(dCount);
  for (int j = 0; j < dCount; ++j) {
    const Eigen::VectorXd w = k.frequencies().row(j).transpose();
    double ej = 0.0;
    for (const auto& c : p.components())
      ej += c.weight * std::exp(-0.5 * w.dot(c.cov * w)) *
            std::cos(w.dot(c.mean) + k.phases()[j]);
    m[j] = std::numbers::sqrt2 * ej;
  }
  const double scale = k.amplitude() * k.amplitude() / dCount;
  const double initial = scale * m.squaredNorm();
  auto evaluate = [k, m, scale](const Eigen::VectorXd& x) {
    return scale * k.features(x).dot(m);
  };
  return MeanElement{std::move(evaluate), initial, MeanElement::Provenance::Analytic};
}

double numericIntegralAgainstDensity(
    const std::function<double(const Eigen::VectorXd&)>& f, const TargetDensity& p,
    double tol) {
  const auto box = massBox(p);
  auto integrand = [&](const Eigen::VectorXd& x) { return f(x) * pdf(p, x); };
  return integrateBox(integrand, box, tol);
}

MeanElement numericMeanElement(const TargetDensity& p, const Kernel& k, double tol) {
  const int d = dim(p);
  if (d != dim(k)) throw InvalidInput("density/kernel dimension mismatch");
  if (d > 3) throw InvalidInput("numerical mean element supports dim <= 3");

  const auto box = massBox(p);

  // Truncated Gaussian x EQ kernel factorises per axis, which makes the
  // deep tensor quadratures cheap: evaluate is a product of 1-D integrals and
  // the initial error is the dim-th power of one 2-D integral.
  if (std::holds_alternative<TruncatedGaussian>(p) &&
      std::holds_alternative<EqKernel>(k)) {
    const auto& eq = std::get<EqKernel>(k);
    const double amp2 = eq.amplitude() * eq.amplitude();
    const double expScale = eq.exponentScale();
    const TruncatedGaussian axis(1);
    const auto [lo, hi] = box[0];

    auto axisPdf = [axis](double u) {
      Eigen::VectorXd v(1);
      v[0] = u;
      return axis.pdf(v);
    };
    const double axisTol = tol / (3.0 * d);

    auto evaluate = [=](const Eigen::VectorXd& x) {
      if (x.size() != d) throw InvalidInput("mean element input dimension mismatch");
      double value = amp2;
      for (int i = 0; i < d; ++i) {
        const double xi = x[i];
        value *= integrateAdaptive(
                     [&](double u) {
                       return std::exp(-expScale * (xi - u) * (xi - u)) * axisPdf(u);
                     },
                     lo, hi, axisTol)
                     .value;
      }
      return value;
    };

    const double axisNorm =
        integrateAdaptive(
            [&](double u) {
              return axisPdf(u) * integrateAdaptive(
                                      [&](double v) {
                                        return std::exp(-expScale * (u - v) * (u - v)) *
                                               axisPdf(v);
                                      },
                                      lo, hi, axisTol * 0.05)
                                      .value;
            },
            lo, hi, axisTol)
            .value;
    const double initial = amp2 * std::pow(axisNorm, d);
    return MeanElement{std::move(evaluate), initial,
                       MeanElement::Provenance::NumericalOracle};
  }

  // Generic path: nested quadrature over the density box.
  auto evaluate = [p, k, box, tol, d](const Eigen::VectorXd& x) {
    if (x.size() != d) throw InvalidInput("mean element input dimension mismatch");
    auto integrand = [&](const Eigen::VectorXd& xp) {
      return eval(k, x, xp) * pdf(p, xp);
    };
    return integrateBox(integrand, box, tol);
  };
  // p[mu_p] = integral of mu_p(x) p(x) dx, with mu_p itself computed
  // numerically at a tighter tolerance.
  auto muTight = [p, k, box, tol](const Eigen::VectorXd& x) {
    auto integrand = [&](const Eigen::VectorXd& xp) {
      return eval(k, x, xp) * pdf(p, xp);
    };
    return integrateBox(integrand, box, tol * 0.05);
  };
  const double initial = numericIntegralAgainstDensity(muTight, p, tol);
  return MeanElement{std::move(evaluate), initial,
                     MeanElement::Provenance::NumericalOracle};
}

}  // namespace fwbq
