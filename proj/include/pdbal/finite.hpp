#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pdbal/rng.hpp"
#include "pdbal/types.hpp"

namespace pdbal {

// An explicitly enumerated model class over a finite design set and finite
// outcome space, with a full density table. This is the exact-computation
// backbone behind the theory checks and the unbiasedness oracles.
struct FiniteModelClass {
  std::vector<std::string> params;   // opaque identifiers
  std::vector<Outcome> outcome_space;
  std::size_t n_designs = 0;
  // Row-major probabilities: probs[(p * n_designs + x) * K + y].
  std::vector<double> probs;
  std::vector<double> prior_weights;

  std::size_t n_params() const { return params.size(); }
  std::size_t n_outcomes() const { return outcome_space.size(); }

  double prob(std::size_t param, std::size_t design, std::size_t outcome) const {
    return probs[(param * n_designs + design) * n_outcomes() + outcome];
  }
  double& prob(std::size_t param, std::size_t design, std::size_t outcome) {
    return probs[(param * n_designs + design) * n_outcomes() + outcome];
  }

  // Entropy of the (param, design) row in nats.
  double row_entropy(std::size_t param, std::size_t design) const;

  // Index of an outcome in outcome_space; throws if absent.
  std::size_t outcome_index(const Outcome& y) const;

  // Checks each (param, design) row sums to 1 within 1e-12 and the prior is a
  // probability vector. Throws on violation.
  void validate() const;
};

struct FinitePosterior {
  std::shared_ptr<const FiniteModelClass> model;
  std::vector<double> weights;

  static FinitePosterior prior(std::shared_ptr<const FiniteModelClass> cls) {
    FinitePosterior post;
    post.weights = cls->prior_weights;
    post.model = std::move(cls);
    return post;
  }
};

struct FiniteUpdateResult {
  FinitePosterior posterior;
  // Normalizer increment Z_{n+1}/Z_n = sum_i w_i P_i(y; x).
  double z_ratio = 0.0;
};

// Exact Bayes update w'_i proportional to w_i * P_i(y; x). Throws when the
// evidence has probability zero under every parameter.
FiniteUpdateResult finite_posterior_update(const FinitePosterior& post,
                                           std::size_t design,
                                           std::size_t outcome);

// Posterior predictive mass of an outcome at a design.
double finite_predictive(const FinitePosterior& post, std::size_t design,
                         std::size_t outcome);

}  // namespace pdbal
