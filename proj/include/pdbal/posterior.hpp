#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "pdbal/finite.hpp"
#include "pdbal/likelihood.hpp"
#include "pdbal/rng.hpp"
#include "pdbal/types.hpp"

namespace pdbal {

struct Dataset {
  std::vector<std::pair<DesignPoint, Outcome>> pairs;

  std::size_t size() const { return pairs.size(); }
  void add(DesignPoint x, Outcome y) { pairs.emplace_back(std::move(x), y); }
};

struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

enum class Provenance { Exact, Mcmc, FiniteEnumeration };

struct PosteriorEnsemble {
  std::vector<ParamVector> samples;
  Provenance provenance = Provenance::Exact;
  // Post-adaptation Metropolis acceptance rate, averaged over chains; NaN for
  // non-MCMC provenance.
  double mcmc_acceptance = std::numeric_limits<double>::quiet_NaN();

  std::size_t size() const { return samples.size(); }
};

struct MCMCConfig {
  int chains = 2;
  int burn_in = 750;
  int thin = 5;
  double target_accept = 0.234;
};

// Closed-form posterior for linear-Gaussian regression under the N(0, v I)
// prior: covariance (X'X/s2 + I/v)^{-1}, mean covariance * X'y / s2. The
// prior regularizes every rank deficiency, so no error paths.
GaussianPosterior conjugate_linear_gaussian(const Dataset& data,
                                            double noise_var, double prior_var,
                                            Eigen::Index dim);

// Closed-form posterior predictive N(x'mu, s2 + x'Sigma x) density at y.
double gaussian_predictive_density(const GaussianPosterior& post,
                                   double noise_var, const DesignPoint& x,
                                   double y);

PosteriorEnsemble sample_gaussian_posterior(const GaussianPosterior& post,
                                            int m, RandomStream& rng);

// Adaptive random-walk Metropolis targeting the GLM posterior under the
// standard-normal prior. Isotropic Gaussian proposal; the step size follows a
// Robbins-Monro recursion toward the target acceptance rate during burn-in
// and is frozen afterwards. Chains are interleaved into the returned
// ensemble.
PosteriorEnsemble metropolis_glm_posterior(const LikelihoodFamily& family,
                                           const Dataset& data,
                                           Eigen::Index dim, int m,
                                           const MCMCConfig& cfg,
                                           const RandomStream& rng);

// Ensemble of i.i.d. draws from a finite posterior, each sample a 1-d vector
// holding the parameter index. Pairs with TabularModel / table_distance_fn.
PosteriorEnsemble sample_finite_posterior(const FinitePosterior& post, int m,
                                          RandomStream& rng);

// Monte-Carlo posterior predictive: average of P_theta(y; x) over samples.
double posterior_predictive(const PosteriorEnsemble& ens,
                            const LikelihoodFamily& family,
                            const DesignPoint& x, const Outcome& y);

double posterior_predictive(const FinitePosterior& post, std::size_t design,
                            std::size_t outcome);

}  // namespace pdbal
