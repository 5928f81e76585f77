#pragma once

#include <Eigen/Dense>
#include <functional>

#include "fwbq/density.hpp"
#include "fwbq/kernel.hpp"

namespace fwbq {

// Kernel embedding of a target density: mu_p(x) = integral of k(x, x') p(x') dx',
// together with its squared RKHS norm p[mu_p] (the squared worst-case error of
// the empty quadrature rule, so "initialError").
struct MeanElement {
  enum class Provenance { Analytic, NumericalOracle };
  std::function<double(const Eigen::VectorXd&)> evaluate;
  double initialError;
  Provenance provenance;
};

// Closed form for a Gaussian mixture under an EQ kernel:
//   mu_p(x)  = a^2 (sqrt(2 pi) s)^d  sum_l  rho_l N(x | mu_l, Sigma_l + s^2 I)
//   p[mu_p]  = a^2 (sqrt(2 pi) s)^d  sum_lm rho_l rho_m N(mu_l | mu_m, Sigma_l + Sigma_m + s^2 I)
// with s the kernel lengthscale and a its amplitude.
MeanElement mixtureEqMeanElement(const GaussianMixture& p, const EqKernel& k);

// Closed form for the truncated Gaussian target under the bare-exponent EQ
// kernel exp(-|x-x'|^2), i.e. EqKernel::withExponentScale(1, 1, dim).  Only
// dim in {1,2,3}; the initial errors are frozen high-precision constants.
MeanElement truncEqMeanElement(int dim);

// Closed form for a Gaussian mixture under a random-feature kernel, via the
// Gaussian characteristic function:
//   E_p[z_j] = sqrt(2) sum_l rho_l exp(-w_j' Sigma_l w_j / 2) cos(w_j . mu_l + b_j).
MeanElement rffMixtureMeanElement(const GaussianMixture& p, const RffKernel& k);

// Brute-force numerical oracle (tensorised adaptive Gauss-Kronrod with the
// domain truncated where the density mass lives).  dim <= 3.  Intended for
// testing the closed forms, not for production selection loops; evaluating
// initialError on a non-separable target costs a 2*dim-deep nested quadrature.
MeanElement numericMeanElement(const TargetDensity& p, const Kernel& k,
                               double tol = 1e-8);

// integral of f(x) p(x) dx by the same tensorised quadrature.
double numericIntegralAgainstDensity(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const TargetDensity& p, double tol = 1e-8);

}  // namespace fwbq
