#include "pdbal/finite.hpp"

#include <cmath>
#include <stdexcept>

#include "pdbal/special.hpp"

namespace pdbal {

double FiniteModelClass::row_entropy(std::size_t param,
                                     std::size_t design) const {
  double h = 0.0;
  for (std::size_t y = 0; y < n_outcomes(); ++y)
    h -= xlogx(prob(param, design, y));
  return h;
}

std::size_t FiniteModelClass::outcome_index(const Outcome& y) const {
  for (std::size_t i = 0; i < outcome_space.size(); ++i)
    if (outcome_space[i] == y) return i;
  throw std::invalid_argument("FiniteModelClass: outcome not in outcome space");
}

void FiniteModelClass::validate() const {
  require(!params.empty() && n_designs > 0 && !outcome_space.empty(),
          "FiniteModelClass: empty dimensions");
  require(probs.size() == n_params() * n_designs * n_outcomes(),
          "FiniteModelClass: table size mismatch");
  require(prior_weights.size() == n_params(),
          "FiniteModelClass: prior size mismatch");
  double wsum = 0.0;
  for (double w : prior_weights) {
    require(w >= 0.0, "FiniteModelClass: negative prior weight");
    wsum += w;
  }
  require(std::abs(wsum - 1.0) <= 1e-12,
          "FiniteModelClass: prior weights must sum to 1");
  for (std::size_t p = 0; p < n_params(); ++p) {
    for (std::size_t x = 0; x < n_designs; ++x) {
      double s = 0.0;
      for (std::size_t y = 0; y < n_outcomes(); ++y) {
        require(prob(p, x, y) >= 0.0, "FiniteModelClass: negative probability");
        s += prob(p, x, y);
      }
      require(std::abs(s - 1.0) <= 1e-12,
              "FiniteModelClass: row does not sum to 1");
    }
  }
}

FiniteUpdateResult finite_posterior_update(const FinitePosterior& post,
                                           std::size_t design,
                                           std::size_t outcome) {
  const auto& cls = *post.model;
  require(design < cls.n_designs && outcome < cls.n_outcomes(),
          "finite_posterior_update: index out of range");
  FiniteUpdateResult result;
  result.posterior.model = post.model;
  result.posterior.weights.resize(post.weights.size());
  double z = 0.0;
  for (std::size_t i = 0; i < post.weights.size(); ++i) {
    const double w = post.weights[i] * cls.prob(i, design, outcome);
    result.posterior.weights[i] = w;
    z += w;
  }
  if (z <= 0.0)
    throw std::runtime_error(
        "finite_posterior_update: outcome impossible under every parameter");
  for (double& w : result.posterior.weights) w /= z;
  result.z_ratio = z;
  return result;
}

double finite_predictive(const FinitePosterior& post, std::size_t design,
                         std::size_t outcome) {
  const auto& cls = *post.model;
  double p = 0.0;
  for (std::size_t i = 0; i < post.weights.size(); ++i)
    p += post.weights[i] * cls.prob(i, design, outcome);
  return p;
}

}  // namespace pdbal
