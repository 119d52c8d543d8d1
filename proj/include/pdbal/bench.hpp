#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pdbal/acquisition.hpp"
#include "pdbal/distance.hpp"
#include "pdbal/posterior.hpp"

namespace pdbal {

struct ScenarioConfig {
  std::string name = "scenario";
  LikelihoodFamily family = LikelihoodFamily::logistic();
  DistanceSpec::Kind distance_kind = DistanceSpec::Kind::First;
  double euclid_scale = 4.0;
  int influence_half_dim = 0;    // 0 -> d/2
  int influence_ref_size = 2000; // reference covariates, drawn once per seed
  int d = 10;
  double mix_p = 0.1;
  int pool_size = 2000;
  int n_queries = 40;
  int m_samples = 300;
  double prior_var = 1.0;
  AcquisitionConfig acquisition;
  MCMCConfig mcmc;
  std::uint64_t seed = 0;  // base seed; runs use seed .. seed + n_seeds - 1
  int n_seeds = 1;
  // Off by default: recorded wall times would break the byte-identical
  // output contract.
  bool record_timings = false;
};

struct TrajectoryRecord {
  int step = 0;  // number of labels observed when the metrics were taken
  std::string strategy;
  std::uint64_t seed = 0;
  double avg_diam = 0.0;
  double target_error = 0.0;
  int chosen_candidate = -1;  // -1 on the final record (no further query)
  double wall_ms = 0.0;
};

// Uniform draw from the radius-2 sphere.
ParamVector gen_ground_truth(int d, RandomStream& rng);

// Covariate mixture: with probability 1-p uniform on the unit sphere; with
// probability p the sparse component, where each coordinate is kept with
// probability 1/d, kept coordinates get Gaussian draws, and the result is
// normalized (the all-zeroed case returns the zero vector).
DesignPoint gen_covariate(int d, double p, RandomStream& rng);

DesignPoint gen_unit_sphere(int d, RandomStream& rng);

// Mean distance from ensemble members to the ground truth: the expected risk
// of committing to a posterior sample.
double target_error(const PosteriorEnsemble& ens, const ParamVector& truth,
                    const DistanceFn& dist);

// Materializes the scenario's distance, drawing the influence reference
// sample from the given stream when needed.
DistanceSpec build_distance(const ScenarioConfig& cfg, RandomStream& rng);

// One seeded active-learning run: per step, fit/sample the posterior on the
// data so far, record metrics, then draw a fresh candidate pool, score it,
// query the selected candidate and observe the ground-truth outcome. Returns
// n_queries + 1 records (step 0 is the prior state). override_dist, when
// given, replaces of the scenario distance (test seam).
std::vector<TrajectoryRecord> run_active_loop(
    const ScenarioConfig& cfg, std::uint64_t seed,
    const DistanceFn* override_dist = nullptr);

extern const char* const kCsvHeader;

void write_csv_header(std::ostream& out);
void write_records_csv(std::ostream& out, const std::string& scenario,
                       const std::vector<TrajectoryRecord>& records,
                       bool timings);

struct TargetedLsReport {
  double restricted_sq_err = 0.0;  // |beta_hat_S - beta*_S|^2, filtered queries
  double full_sq_err = 0.0;        // same error for full least squares
  double beta_norm_sq = 0.0;
};

// Targeted least-squares demonstration: restricted LS over the first k
// coordinates on n covariates filtered to |x_S|^2 >= 1 - alpha, against full
// (minimum-norm) LS on n unfiltered covariates. Filtered covariates are
// drawn from the exact conditional sphere distribution.
TargetedLsReport targeted_ls_demo(int d, int k, double alpha, int n,
                                  double sigma, RandomStream& rng);

}  // namespace pdbal
