#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "pdbal/distance.hpp"
#include "pdbal/model.hpp"
#include "pdbal/posterior.hpp"

namespace pdbal {

enum class Strategy { PDBAL, Random, Variance, EIG };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);

struct AcquisitionConfig {
  Strategy strategy = Strategy::PDBAL;
  int n_mc = 10000;     // triple subsample count per selection round
  int eig_nodes = 64;   // quadrature nodes for continuous predictive entropy
  bool force_sampled_y = false;  // forces the sampled-outcome estimator path
};

// Which estimator variant a PDBAL score came from.
enum class PdbalPath { ClosedForm, SampledY, None };

struct ScoreReport {
  std::vector<double> scores;
  int chosen_index = -1;
  std::uint64_t rng_draws_consumed = 0;
  PdbalPath pdbal_path = PdbalPath::None;
};

struct Triple {
  int i, j, k;
};

// Uniform draws (with replacement) from { (i,j,k) : i < j < k < m }.
std::vector<Triple> draw_triples(int m, int count, RandomStream& rng);

// Exact PDBAL objective on a finite posterior: the triple sum over
// (theta*, theta, theta', y) of w3 * P*(y) P(y) P'(y) d(theta,theta')
// exp(2 H_*), with entropies taken from the class table.
double pdbal_score_exact(const FinitePosterior& post, std::size_t design,
                         const Eigen::MatrixXd& dist);

// Reference DBAL score for deterministic classes:
// max_y sum_{t,t'} w w' d(t,t') [f_t(x) = y = f_t'(x)].
double dbal_score_deterministic(const FinitePosterior& post,
                                std::size_t design,
                                const Eigen::MatrixXd& dist);

// Monte-Carlo PDBAL score of one candidate. Draws n_mc index triples from
// rng; uses the closed-form kernel when the model provides one (and
// force_sampled_y is off), otherwise samples one outcome per ensemble member
// and reuses it across triples sharing k. Models whose entropy varies with
// theta contribute the exp(2 H_k) weight per term.
double pdbal_score_mc(const PosteriorEnsemble& ens, const OutcomeModel& model,
                      const DesignPoint& x, const DistanceFn& dist,
                      const AcquisitionConfig& cfg, RandomStream& rng,
                      PdbalPath* path_out = nullptr);

// BALD-style expected information gain: predictive entropy minus mean model
// entropy. Discrete outcome spaces are summed exactly; continuous ones are
// integrated numerically over the ensemble mixture.
double eig_score(const PosteriorEnsemble& ens, const OutcomeModel& model,
                 const DesignPoint& x, const AcquisitionConfig& cfg);

// Closed form for the exact Gaussian posterior: 0.5 ln(1 + x'Sigma x / s2).
double eig_score_gaussian_exact(const GaussianPosterior& post,
                                double noise_var, const DesignPoint& x);

// Law-of-total-variance decomposition of the posterior predictive variance,
// with population (1/m) normalization on the mean-variance term.
double variance_score(const PosteriorEnsemble& ens, const OutcomeModel& model,
                      const DesignPoint& x);

// PDBAL minimizes, Variance/EIG maximize, Random ignores scores. Ties break
// to the lowest index.
int select_query(std::span<const double> scores, Strategy strategy,
                 RandomStream& rng);

// Scores a candidate pool under one strategy and selects the next query.
// Triples are drawn once per round and shared across candidates; sampled-y
// substreams derive from the candidate index (or from a content hash of the
// candidate row when hash_substreams is set, so duplicate rows score
// identically). OpenMP-parallel over candidates; results are independent of
// the thread count.
ScoreReport score_pool(const std::vector<DesignPoint>& pool,
                       const PosteriorEnsemble& ens, const OutcomeModel& model,
                       const DistanceFn& dist, const AcquisitionConfig& cfg,
                       const RandomStream& rng, bool hash_substreams = false);

// Serial reference implementation: same estimators through the generic
// (virtual dispatch) code path, single-threaded. Kept for validating the
// specialized kernels and for benchmarking.
ScoreReport score_pool_serial(const std::vector<DesignPoint>& pool,
                              const PosteriorEnsemble& ens,
                              const OutcomeModel& model, const DistanceFn& dist,
                              const AcquisitionConfig& cfg,
                              const RandomStream& rng,
                              bool hash_substreams = false);

}  // namespace pdbal
