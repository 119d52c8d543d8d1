#include "pdbal/model.hpp"

#include <cmath>
#include <span>

namespace pdbal {

Outcome TabularModel::sample(const ParamVector& theta, const DesignPoint& x,
                             RandomStream& rng) const {
  const std::size_t p = param_of(theta);
  const std::size_t d = design_of(x);
  const std::size_t k = cls_->n_outcomes();
  const double* row = &cls_->probs[(p * cls_->n_designs + d) * k];
  const std::size_t idx = rng.categorical(std::span<const double>(row, k));
  return cls_->outcome_space[idx];
}

Moments TabularModel::moments(const ParamVector& theta,
                              const DesignPoint& x) const {
  const std::size_t p = param_of(theta);
  const std::size_t d = design_of(x);
  double mean = 0.0, second = 0.0;
  for (std::size_t y = 0; y < cls_->n_outcomes(); ++y) {
    const double w = cls_->prob(p, d, y);
    const double v = cls_->outcome_space[y].value;
    mean += w * v;
    second += w * v * v;
  }
  return {mean, second - mean * mean};
}

std::optional<double> TabularModel::triple_kernel(const ParamVector& t1,
                                                  const ParamVector& t2,
                                                  const ParamVector& t3,
                                                  const DesignPoint& x) const {
  const std::size_t d = design_of(x);
  const std::size_t k = cls_->n_outcomes();
  const double* r1 = &cls_->probs[(param_of(t1) * cls_->n_designs + d) * k];
  const double* r2 = &cls_->probs[(param_of(t2) * cls_->n_designs + d) * k];
  const double* r3 = &cls_->probs[(param_of(t3) * cls_->n_designs + d) * k];
  double out = 0.0;
  for (std::size_t y = 0; y < k; ++y) out += r1[y] * r2[y] * r3[y];
  return out;
}

}  // namespace pdbal
