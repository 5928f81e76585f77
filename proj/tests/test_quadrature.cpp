#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "fwbq/density.hpp"
#include "fwbq/errors.hpp"
#include "fwbq/kernel.hpp"
#include "fwbq/mean_element.hpp"
#include "fwbq/quadrature.hpp"
#include "fwbq/rng.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using fwbq::EqKernel;
using fwbq::GaussianMixture;
using fwbq::IllConditionedGram;
using fwbq::IntegralPosterior;
using fwbq::InvalidInput;
using fwbq::Kernel;
using fwbq::MeanElement;
using fwbq::Method;
using fwbq::QuadratureRule;
using fwbq::RngSeed;

namespace {

struct Setup {
  GaussianMixture p;
  Kernel k;
  MeanElement mu;
};

Setup mixtureSetup() {
  std::vector<GaussianMixture::Component> comps(2);
  comps[0].weight = 0.4;
  comps[0].mean = VectorXd::Constant(1, -0.5);
  comps[0].cov = MatrixXd::Constant(1, 1, 0.6);
  comps[1].weight = 0.6;
  comps[1].mean = VectorXd::Constant(1, 0.9);
  comps[1].cov = MatrixXd::Constant(1, 1, 0.9);
  GaussianMixture p(comps);
  EqKernel k(1.0, 0.8, 1);
  MeanElement mu = fwbq::mixtureEqMeanElement(p, k);
  return {p, Kernel{k}, mu};
}

std::vector<VectorXd> randomPoints(int n, int d, RngSeed seed) {
  fwbq::Rng rng(seed);
  std::vector<VectorXd> pts;
  for (int i = 0; i < n; ++i) {
    VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = rng.uniform(-2.0, 2.0);
    pts.push_back(x);
  }
  return pts;
}

}  // namespace

TEST_CASE("method names round trip and the family predicates hold") {
  for (Method m : {Method::MC, Method::FW, Method::FWLS, Method::FWBQ,
                   Method::FWLSBQ, Method::SBQ})
    CHECK(fwbq::parseMethod(fwbq::methodName(m)) == m);
  CHECK_THROWS_AS(fwbq::parseMethod("bogus"), InvalidInput);
  CHECK_THROWS_AS(fwbq::parseMethod("fwbq"), InvalidInput);  // case sensitive

  CHECK_FALSE(fwbq::usesBqWeights(Method::MC));
  CHECK_FALSE(fwbq::usesBqWeights(Method::FW));
  CHECK_FALSE(fwbq::usesBqWeights(Method::FWLS));
  CHECK(fwbq::usesBqWeights(Method::FWBQ));
  CHECK(fwbq::usesBqWeights(Method::FWLSBQ));
  CHECK(fwbq::usesBqWeights(Method::SBQ));
  CHECK(fwbq::usesLineSearch(Method::FWLS));
  CHECK(fwbq::usesLineSearch(Method::FWLSBQ));
  CHECK_FALSE(fwbq::usesLineSearch(Method::FW));
  CHECK_FALSE(fwbq::usesLineSearch(Method::SBQ));
}

TEST_CASE("step-size sequences map to the right convex weights") {
  CHECK(fwbq::fwWeights({}).size() == 0);

  const VectorXd w1 = fwbq::fwWeights({1.0});
  REQUIRE(w1.size() == 1);
  CHECK(w1[0] == 1.0);

  // w_i = rho_i prod_{j>i} (1 - rho_j), worked by hand:
  const VectorXd w2 = fwbq::fwWeights({1.0, 0.5});
  CHECK(w2[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w2[1] == doctest::Approx(0.5).epsilon(1e-15));

  const VectorXd w3 = fwbq::fwWeights({1.0, 0.3, 0.2});
  CHECK(w3[0] == doctest::Approx(0.7 * 0.8).epsilon(1e-15));
  CHECK(w3[1] == doctest::Approx(0.3 * 0.8).epsilon(1e-15));
  CHECK(w3[2] == doctest::Approx(0.2).epsilon(1e-15));

  // The harmonic schedule rho_i = 1/(i+1) collapses to uniform weights.
  std::vector<double> harmonic;
  for (int i = 0; i < 40; ++i) harmonic.push_back(1.0 / (i + 1));
  const VectorXd w40 = fwbq::fwWeights(harmonic);
  for (int i = 0; i < 40; ++i)
    CHECK(w40[i] == doctest::Approx(1.0 / 40.0).epsilon(1e-12));

  // Any valid schedule yields a point on the simplex.
  fwbq::Rng rng(RngSeed{5});
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> steps{1.0};
    for (int i = 1; i < 15; ++i) steps.push_back(rng.uniform());
    const VectorXd w = fwbq::fwWeights(steps);
    CHECK(w.minCoeff() >= 0.0);
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }

  CHECK_THROWS_AS(fwbq::fwWeights({0.5}), InvalidInput);
  CHECK_THROWS_AS(fwbq::fwWeights({1.0, 1.5}), InvalidInput);
  CHECK_THROWS_AS(fwbq::fwWeights({1.0, -0.1}), InvalidInput);
}

TEST_CASE("reweighted quadrature weights solve the gram system") {
  const Setup s = mixtureSetup();
  const auto pts = randomPoints(8, 1, RngSeed{11});
  const VectorXd w = fwbq::bqWeights(pts, s.k, s.mu);
  REQUIRE(w.size() == 8);

  VectorXd z(8);
  for (int i = 0; i < 8; ++i) z[i] = s.mu.evaluate(pts[i]);
  const MatrixXd g = fwbq::gram(s.k, pts);
  CHECK((g * w - z).norm() <= 1e-8 * z.norm());

  CHECK_THROWS_AS(fwbq::bqWeights({}, s.k, s.mu), InvalidInput);
  auto dup = pts;
  dup.push_back(pts[3]);
  CHECK_THROWS_AS(fwbq::bqWeights(dup, s.k, s.mu), InvalidInput);
}

TEST_CASE("reweighting minimises the squared worst-case error") {
  const Setup s = mixtureSetup();
  const auto pts = randomPoints(6, 1, RngSeed{23});
  const VectorXd wBq = fwbq::bqWeights(pts, s.k, s.mu);
  const double best = fwbq::mmdSquared({pts, wBq, Method::FWBQ}, s.k, s.mu);

  fwbq::Rng rng(RngSeed{29});
  for (int trial = 0; trial < 100; ++trial) {
    VectorXd w = wBq;
    for (int i = 0; i < w.size(); ++i) w[i] += rng.uniform(-0.2, 0.2);
    const double perturbed = fwbq::mmdSquared({pts, w, Method::FWBQ}, s.k, s.mu);
    CHECK(best <= perturbed + 1e-12);
  }
}

TEST_CASE("squared MMD agrees with a sampling estimate of the embedding norm") {
  // Independent of any closed form: p[mu_p] = E k(X, X') over independent
  // pairs and mu_p(x) = E k(x, X), both estimated from disjoint draws.
  const Setup s = mixtureSetup();
  const auto pts = randomPoints(4, 1, RngSeed{37});
  VectorXd w(4);
  w << 0.1, 0.4, 0.3, 0.2;

  const int m = 400000;
  const auto draws = s.p.sample(2 * m, RngSeed{41});
  double pairSum = 0.0, pairSumSq = 0.0;
  VectorXd embSum = VectorXd::Zero(4);
  for (int i = 0; i < m; ++i) {
    const double kv = fwbq::eval(s.k, draws[2 * i], draws[2 * i + 1]);
    pairSum += kv;
    pairSumSq += kv * kv;
    for (int j = 0; j < 4; ++j) embSum[j] += fwbq::eval(s.k, pts[j], draws[2 * i]);
  }
  const double pMuEst = pairSum / m;
  const double pairSe = std::sqrt((pairSumSq / m - pMuEst * pMuEst) / m);

  double mcMmd = pMuEst;
  for (int j = 0; j < 4; ++j) mcMmd -= 2.0 * w[j] * embSum[j] / m;
  const MatrixXd g = fwbq::gram(s.k, pts);
  mcMmd += w.dot(g * w);

  const double exact = fwbq::mmdSquared({pts, w, Method::FW}, s.k, s.mu);
  // Conservative bound: the weighted estimator error is within a few pair
  // standard errors; 8 of them keeps the flake rate negligible.
  CHECK(std::abs(exact - mcMmd) < 8.0 * pairSe);
}

TEST_CASE("empty rules fall back to the prior") {
  const Setup s = mixtureSetup();
  const QuadratureRule empty{{}, VectorXd(0), Method::FWBQ};
  CHECK(fwbq::mmdSquared(empty, s.k, s.mu) == s.mu.initialError);

  const IntegralPosterior prior = fwbq::posterior({}, VectorXd(0), s.k, s.mu);
  CHECK(prior.mean == 0.0);
  CHECK(prior.variance == s.mu.initialError);
}

TEST_CASE("posterior variance equals the squared MMD of the reweighted rule") {
  const Setup s = mixtureSetup();
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 7;
    const auto pts = randomPoints(n, 1, RngSeed{static_cast<std::uint64_t>(100 + trial)});
    fwbq::Rng rng(RngSeed{static_cast<std::uint64_t>(200 + trial)});
    VectorXd f(n);
    for (int i = 0; i < n; ++i) f[i] = rng.normal();

    const IntegralPosterior post = fwbq::posterior(pts, f, s.k, s.mu);
    const VectorXd w = fwbq::bqWeights(pts, s.k, s.mu);
    const double mmd2 = fwbq::mmdSquared({pts, w, Method::FWBQ}, s.k, s.mu);
    CHECK(post.variance == doctest::Approx(mmd2).epsilon(1e-10));
    CHECK(post.mean == doctest::Approx(w.dot(f)).epsilon(1e-12));
    CHECK(post.variance >= 0.0);
  }
}

TEST_CASE("functions in the span of the design are integrated exactly") {
  const Setup s = mixtureSetup();
  const auto pts = randomPoints(10, 1, RngSeed{53});
  const MatrixXd g = fwbq::gram(s.k, pts);

  fwbq::Rng rng(RngSeed{59});
  VectorXd c(10);
  for (int i = 0; i < 10; ++i) c[i] = rng.uniform(-2.0, 2.0);

  // f = sum_i c_i k(., x_i): values at the design are G c, the exact integral
  // is c' z.
  const VectorXd fValues = g * c;
  VectorXd z(10);
  for (int i = 0; i < 10; ++i) z[i] = s.mu.evaluate(pts[i]);
  const double exact = c.dot(z);

  const IntegralPosterior post = fwbq::posterior(pts, fValues, s.k, s.mu);
  CHECK(post.mean == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("posterior tail mass outside an interval is Gaussian arithmetic") {
  const IntegralPosterior post{0.0, 1.0};
  // P(|Z| > 1.959964) = 0.05.
  CHECK(fwbq::contractionMass(post, -1.959964, 1.959964) ==
        doctest::Approx(0.05).epsilon(1e-5));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(fwbq::contractionMass(post, -inf, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fwbq::contractionMass(post, -inf, inf) == doctest::Approx(0.0));

  const IntegralPosterior shifted{2.0, 4.0};
  // Standardise: P(X < 1) + P(X > 5) with X ~ N(2, 4).
  const double want = 0.5 * std::erfc(0.5 / std::sqrt(2.0)) +
                      0.5 * std::erfc(1.5 / std::sqrt(2.0));
  CHECK(fwbq::contractionMass(shifted, 1.0, 5.0) ==
        doctest::Approx(want).epsilon(1e-12));

  // Collapsed posterior: indicator of the mean lying outside.
  const IntegralPosterior point{1.0, 0.0};
  CHECK(fwbq::contractionMass(point, 0.0, 2.0) == 0.0);
  CHECK(fwbq::contractionMass(point, 2.0, 3.0) == 1.0);

  CHECK_THROWS_AS(fwbq::contractionMass(post, 1.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(fwbq::contractionMass(post, 2.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(fwbq::contractionMass({0.0, -1.0}, 0.0, 1.0), InvalidInput);
}

TEST_CASE("tail bound: exact value, asymptotic envelope, and their ratio") {
  // erfc(1/sqrt(2)) at gamma = sigma.
  CHECK(fwbq::contractionBound(1.0, 1.0).exact ==
        doctest::Approx(0.317310507862914).epsilon(1e-12));
  // 5% two-sided quantile.
  CHECK(fwbq::contractionBound(1.959964, 1.0).exact ==
        doctest::Approx(0.05).epsilon(1e-5));

  // The large-deviation form is an upper envelope that tightens as gamma/sigma
  // grows: classic erfc(t) <= exp(-t^2) / (t sqrt(pi)).
  for (double ratio : {0.5, 1.0, 2.0, 4.0, 6.0, 8.0}) {
    const auto b = fwbq::contractionBound(ratio, 1.0);
    CHECK(b.asymptotic >= b.exact);
    if (ratio >= 6.0) CHECK(b.asymptotic / b.exact < 1.05);
  }
  // Scale invariance in gamma / sigma.
  const auto a = fwbq::contractionBound(3.0, 1.5);
  const auto b = fwbq::contractionBound(2.0, 1.0);
  CHECK(a.exact == doctest::Approx(b.exact).epsilon(1e-14));
  CHECK_THROWS_AS(fwbq::contractionBound(0.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(fwbq::contractionBound(1.0, 0.0), InvalidInput);
}

TEST_CASE("duplicate points merge by summing weights in first-seen order") {
  VectorXd a = VectorXd::Constant(1, 1.0);
  VectorXd b = VectorXd::Constant(1, 2.0);
  VectorXd c = VectorXd::Constant(1, 3.0);
  const std::vector<VectorXd> pts{a, b, a, c, b};
  VectorXd w(5);
  w << 0.1, 0.2, 0.3, 0.25, 0.15;

  const QuadratureRule merged = fwbq::mergeDuplicates(pts, w, Method::FW);
  REQUIRE(merged.points.size() == 3);
  CHECK(merged.points[0] == a);
  CHECK(merged.points[1] == b);
  CHECK(merged.points[2] == c);
  CHECK(merged.weights[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(merged.weights[1] == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(merged.weights[2] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(merged.method == Method::FW);

  const auto unique = fwbq::uniquePoints(pts);
  REQUIRE(unique.size() == 3);
  CHECK(unique[0] == a);
  CHECK(unique[1] == b);
  CHECK(unique[2] == c);

  VectorXd wrong(2);
  CHECK_THROWS_AS(fwbq::mergeDuplicates(pts, wrong, Method::FW), InvalidInput);
}

TEST_CASE("gram factorisation escalates jitter only as far as needed") {
  const MatrixXd id = MatrixXd::Identity(4, 4);
  const fwbq::GramFactor clean = fwbq::factorGram(id, 1.0);
  CHECK(clean.jitter == 0.0);
  const VectorXd rhs = VectorXd::Ones(4);
  CHECK((clean.llt.solve(rhs) - rhs).norm() < 1e-14);

  // Two identical rows: exactly singular, so some jitter is required.
  MatrixXd singular(3, 3);
  singular << 1.0, 1.0, 0.2, 1.0, 1.0, 0.2, 0.2, 0.2, 1.0;
  const fwbq::GramFactor fixed = fwbq::factorGram(singular, 1.0);
  CHECK(fixed.jitter > 0.0);
  CHECK(fixed.jitter <= 1e-4);
  CHECK(fixed.llt.info() == Eigen::Success);

  // Negative definite input cannot be rescued by diagonal jitter.
  CHECK_THROWS_AS(fwbq::factorGram(-id, 1.0), IllConditionedGram);
  try {
    fwbq::factorGram(-id, 1.0);
  } catch (const IllConditionedGram& e) {
    CHECK(std::isfinite(e.conditionEstimate));
  }
}

TEST_CASE("applying a rule is the weighted sum of function values") {
  const auto pts = randomPoints(3, 1, RngSeed{61});
  VectorXd w(3);
  w << 0.2, 0.5, 0.3;
  VectorXd f(3);
  f << 1.0, -2.0, 4.0;
  const QuadratureRule rule{pts, w, Method::MC};
  CHECK(fwbq::apply(rule, f) == doctest::Approx(0.2 - 1.0 + 1.2).epsilon(1e-15));

  VectorXd wrong(2);
  CHECK_THROWS_AS(fwbq::apply(rule, wrong), InvalidInput);
  const QuadratureRule broken{pts, wrong, Method::MC};
  CHECK_THROWS_AS(fwbq::apply(broken, f), InvalidInput);
}

TEST_CASE("near-coincident designs stay numerically nonnegative") {
  const Setup s = mixtureSetup();
  auto pts = randomPoints(10, 1, RngSeed{67});
  pts.push_back(pts[0] + VectorXd::Constant(1, 1e-9));
  const VectorXd w = fwbq::bqWeights(pts, s.k, s.mu);
  const double mmd2 = fwbq::mmdSquared({pts, w, Method::FWBQ}, s.k, s.mu);
  CHECK(mmd2 >= 0.0);
  CHECK(std::isfinite(mmd2));
}
