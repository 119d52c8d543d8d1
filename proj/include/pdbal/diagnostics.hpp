#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "pdbal/distance.hpp"
#include "pdbal/finite.hpp"
#include "pdbal/posterior.hpp"

namespace pdbal {

// Average diameter E_{t,t'}[d(t,t')]: exact double sum for finite posteriors,
// U-statistic over unordered sample pairs for ensembles.
double avg_diameter(const FinitePosterior& post, const Eigen::MatrixXd& dist);
double avg_diameter(const PosteriorEnsemble& ens, const DistanceFn& dist);

struct SplitReport {
  double rho = 0.0;      // clamped to [0, 1]
  double rho_raw = 0.0;  // 1 - s / avg_diam, may leave [0, 1] for noisy models
  double s_value = 0.0;
  double avg_diam = 0.0;
  bool clamped = false;
};

// rho such that s_n(x) = (1 - rho) avg-diam; requires avg_diam > 0.
SplitReport splitting_value(const FinitePosterior& post, std::size_t design,
                            const Eigen::MatrixXd& dist);

struct PotentialStep {
  double w = 1.0;         // W_t = exp(sum H(x_i)) * Z_t
  double avg_diam = 0.0;
  double product = 0.0;   // W_t^2 * avg_diam_t
};

// Potential trace along a query sequence. Requires per-design entropy
// constant across parameters (throws otherwise). Step 0 is the prior state
// with W_0 = 1.
std::vector<PotentialStep> potential_trace(
    const FiniteModelClass& cls,
    const std::vector<std::pair<std::size_t, std::size_t>>& queries,
    const Eigen::MatrixXd& dist);

struct CheckReport {
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string reason;
  // Slack in the verified inequality (right side minus left side); a margin
  // below -1e-12 is a violation.
  double margin = 0.0;
};

// Potential contraction: the exact expectation over outcomes of
// W^2 * avg-diam after one Bayes update is at most (1 - rho) * avg-diam,
// with rho the (raw) splitting value. The outcome is drawn from the
// posterior mixture.
CheckReport check_potential_contraction(const FinitePosterior& post,
                                        std::size_t design,
                                        const Eigen::MatrixXd& dist);

// Splitting sub-additivity for the combined two-coordinate query:
// rho12 <= rho1 + rho2 when the common entropy h is zero, and
// rho12 <= 2 (rho1 + rho2) when 0 <= h < (rho1 + rho2) / 6.
// Skips (with reason) when the bound's hypotheses fail.
CheckReport check_combine_split(const FinitePosterior& post,
                                std::size_t design1, std::size_t design2,
                                const Eigen::MatrixXd& dist);

// --- Random conforming classes for the property/check harnesses -----------

enum class ClassNoise { Deterministic, LowEntropy, Dirichlet };

struct ClassGenOptions {
  int min_params = 4;
  int max_params = 6;
  int min_outcomes = 3;
  int max_outcomes = 5;
  int n_designs = 2;
  ClassNoise noise = ClassNoise::Dirichlet;
  // Probability mass on the modal outcome when assigning per-parameter
  // answers; higher values produce weaker splits (keeps rho1 + rho2 < 1
  // reachable).
  double answer_skew = 0.7;
};

// Rows at each design are permutations of one base vector, so entropy is
// constant across parameters by construction (the conforming-class property
// the theory checks require).
FiniteModelClass random_conforming_class(const ClassGenOptions& opts,
                                         RandomStream& rng);

// Fully random rows (no entropy constraint); used by the unbiasedness
// harness.
FiniteModelClass random_free_class(int max_params, int max_outcomes,
                                   int n_designs, RandomStream& rng);

// Symmetric zero-diagonal distance table with entries in [0, 1].
Eigen::MatrixXd random_distance_table(std::size_t n, RandomStream& rng);

std::vector<double> random_simplex(std::size_t n, RandomStream& rng);

// --- Kernel oracle suite ----------------------------------------------------
// Compares every closed-form triple kernel against an independent numerical
// route (adaptive quadrature for densities, truncated series for mass
// functions, direct summation for the categorical case). inject_fault
// perturbs the closed-form value, as a negative control for the harness.
std::vector<CheckReport> kernel_oracle_checks(std::uint64_t seed,
                                              int n_per_kernel,
                                              bool inject_fault = false);

// Aggregated randomized-class suites behind the `check` subcommand and the
// acceptance gate.
struct SuiteResult {
  std::string name;
  int checked = 0;      // classes on which the inequality was evaluated
  int violations = 0;
  int attempts = 0;     // classes generated, including skipped ones
  double min_margin = std::numeric_limits<double>::infinity();

  bool passed() const { return violations == 0 && checked > 0; }
};

// check_potential_contraction over n_classes random constant-entropy classes.
SuiteResult contraction_suite(std::uint64_t seed, int n_classes);

// check_combine_split over n_classes valid (non-skipped) classes of the
// given noise kind; generation retries until enough classes satisfy the
// bound's hypotheses.
SuiteResult subadditivity_suite(std::uint64_t seed, int n_classes,
                                ClassNoise noise);

}  // namespace pdbal
