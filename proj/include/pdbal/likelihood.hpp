#pragma once

#include <optional>
#include <span>

#include "pdbal/rng.hpp"
#include "pdbal/types.hpp"

namespace pdbal {

enum class FamilyKind { LinearGaussian, Logistic, Poisson, BetaMean };

const char* to_string(FamilyKind kind);

// A regression likelihood P_theta(y; x) keyed on the linear predictor
// eta = <x, theta>. Fixed hyperparameters: noise variance for the Gaussian,
// precision phi for Beta mean regression.
struct LikelihoodFamily {
  FamilyKind kind = FamilyKind::LinearGaussian;
  double noise_var = 1.0;  // LinearGaussian sigma^2
  double precision = 10.0; // BetaMean phi

  static LikelihoodFamily linear_gaussian(double sigma_sq) {
    require(sigma_sq > 0.0, "LinearGaussian: sigma^2 must be > 0");
    return {FamilyKind::LinearGaussian, sigma_sq, 0.0};
  }
  static LikelihoodFamily logistic() { return {FamilyKind::Logistic, 0.0, 0.0}; }
  static LikelihoodFamily poisson() { return {FamilyKind::Poisson, 0.0, 0.0}; }
  static LikelihoodFamily beta_mean(double phi) {
    require(phi > 0.0, "BetaMean: phi must be > 0");
    return {FamilyKind::BetaMean, 0.0, phi};
  }

  OutcomeTag outcome_tag() const;
  // True when H_theta(x) does not depend on theta (the Gaussian case).
  bool constant_entropy() const { return kind == FamilyKind::LinearGaussian; }
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

double log_density(const LikelihoodFamily& family, const ParamVector& theta,
                   const DesignPoint& x, const Outcome& y);

Outcome sample_outcome(const LikelihoodFamily& family, const ParamVector& theta,
                       const DesignPoint& x, RandomStream& rng);

// Response entropy H_theta(x) in nats.
double entropy(const LikelihoodFamily& family, const ParamVector& theta,
               const DesignPoint& x);

Moments predictive_moments(const LikelihoodFamily& family,
                           const ParamVector& theta, const DesignPoint& x);

// Entropy of Poisson(lambda) by direct summation, truncated once the
// remaining tail mass is below 1e-12.
double poisson_entropy(double lambda);

// --- Triple kernels M(x; t1, t2, t3) = E_{y~P1}[P2(y) P3(y)] ---------------
//
// The Gaussian form integrates the product of three spherical normal
// densities. With alpha = v1 v2 + v2 v3 + v1 v3, the value is
//   (alpha (2 pi)^2)^{-d/2} *
//   exp( -(v3 |m1-m2|^2 + v1 |m2-m3|^2 + v2 |m1-m3|^2) / (2 alpha) ),
// i.e. the sum runs over the three unordered pairs, each weighted by the
// excluded component's variance. The exponent constant is pinned against the
// quadrature oracle in the test suite.
double triple_kernel_gaussian(const Eigen::VectorXd& mu1, double var1,
                              const Eigen::VectorXd& mu2, double var2,
                              const Eigen::VectorXd& mu3, double var3);

double triple_kernel_categorical(std::span<const double> p1,
                                 std::span<const double> p2,
                                 std::span<const double> p3);

double triple_kernel_exponential(double rate1, double rate2, double rate3);

double triple_kernel_geometric(double p1, double p2, double p3);

// Requires a1 + a2 + a3 > 2 (the integral diverges otherwise). Evaluated in
// log space.
double triple_kernel_gamma(double a1, double b1, double a2, double b2,
                           double a3, double b3);

// Finite sum over k = 0..r-1; binomial coefficients through lgamma.
double triple_kernel_negbinom(int r, double p1, double p2, double p3);

// Family dispatch. Closed forms exist for LinearGaussian (the
// Gaussian kernel on the scalar predictive) and Logistic (Bernoulli as a
// two-category case). Poisson and BetaMean return nullopt; callers fall back
// to the sampled-outcome estimator.
std::optional<double> triple_kernel(const LikelihoodFamily& family,
                                    const ParamVector& t1,
                                    const ParamVector& t2,
                                    const ParamVector& t3,
                                    const DesignPoint& x);

}  // namespace pdbal
