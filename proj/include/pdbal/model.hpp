#pragma once

#include <memory>
#include <optional>

#include "pdbal/finite.hpp"
#include "pdbal/likelihood.hpp"

namespace pdbal {

// Uniform view over "a parameterized outcome distribution" used by the
// Monte-Carlo acquisition scores. GlmModel wraps a LikelihoodFamily where
// theta is a coefficient vector; TabularModel wraps a FiniteModelClass where
// theta and x are 1-d index vectors, which lets the exact finite oracles be
// exercised through the same estimator code path.
class OutcomeModel {
 public:
  virtual ~OutcomeModel() = default;

  virtual double log_density(const ParamVector& theta, const DesignPoint& x,
                             const Outcome& y) const = 0;
  virtual Outcome sample(const ParamVector& theta, const DesignPoint& x,
                         RandomStream& rng) const = 0;
  virtual double entropy(const ParamVector& theta,
                         const DesignPoint& x) const = 0;
  virtual Moments moments(const ParamVector& theta,
                          const DesignPoint& x) const = 0;
  virtual bool constant_entropy() const = 0;
  virtual bool has_closed_triple_kernel() const = 0;
  virtual std::optional<double> triple_kernel(const ParamVector& t1,
                                              const ParamVector& t2,
                                              const ParamVector& t3,
                                              const DesignPoint& x) const = 0;
};

class GlmModel final : public OutcomeModel {
 public:
  explicit GlmModel(LikelihoodFamily family) : family_(family) {}

  const LikelihoodFamily& family() const { return family_; }

  double log_density(const ParamVector& theta, const DesignPoint& x,
                     const Outcome& y) const override {
    return pdbal::log_density(family_, theta, x, y);
  }
  Outcome sample(const ParamVector& theta, const DesignPoint& x,
                 RandomStream& rng) const override {
    return pdbal::sample_outcome(family_, theta, x, rng);
  }
  double entropy(const ParamVector& theta, const DesignPoint& x) const override {
    return pdbal::entropy(family_, theta, x);
  }
  Moments moments(const ParamVector& theta, const DesignPoint& x) const override {
    return pdbal::predictive_moments(family_, theta, x);
  }
  bool constant_entropy() const override { return family_.constant_entropy(); }
  bool has_closed_triple_kernel() const override {
    return family_.kind == FamilyKind::LinearGaussian ||
           family_.kind == FamilyKind::Logistic;
  }
  std::optional<double> triple_kernel(const ParamVector& t1,
                                      const ParamVector& t2,
                                      const ParamVector& t3,
                                      const DesignPoint& x) const override {
    return pdbal::triple_kernel(family_, t1, t2, t3, x);
  }

 private:
  LikelihoodFamily family_;
};

class TabularModel final : public OutcomeModel {
 public:
  explicit TabularModel(std::shared_ptr<const FiniteModelClass> cls)
      : cls_(std::move(cls)) {}

  const FiniteModelClass& model_class() const { return *cls_; }

  double log_density(const ParamVector& theta, const DesignPoint& x,
                     const Outcome& y) const override {
    const double p = cls_->prob(param_of(theta), design_of(x),
                                cls_->outcome_index(y));
    return std::log(p);
  }
  Outcome sample(const ParamVector& theta, const DesignPoint& x,
                 RandomStream& rng) const override;
  double entropy(const ParamVector& theta, const DesignPoint& x) const override {
    return cls_->row_entropy(param_of(theta), design_of(x));
  }
  Moments moments(const ParamVector& theta, const DesignPoint& x) const override;
  bool constant_entropy() const override { return false; }
  bool has_closed_triple_kernel() const override { return true; }
  // Finite outcome space: the categorical kernel applies directly.
  std::optional<double> triple_kernel(const ParamVector& t1,
                                      const ParamVector& t2,
                                      const ParamVector& t3,
                                      const DesignPoint& x) const override;

  static std::size_t param_of(const ParamVector& theta) {
    return static_cast<std::size_t>(theta[0]);
  }
  static std::size_t design_of(const DesignPoint& x) {
    return static_cast<std::size_t>(x[0]);
  }
  static DesignPoint design_point(std::size_t design) {
    DesignPoint x(1);
    x[0] = double(design);
    return x;
  }

 private:
  std::shared_ptr<const FiniteModelClass> cls_;
};

}  // namespace pdbal
