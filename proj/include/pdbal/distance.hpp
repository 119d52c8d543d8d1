#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "pdbal/types.hpp"

namespace pdbal {

// Reference covariates for the restricted-sign influence distance; frozen at
// scenario setup so the distance is a pure function of its two arguments.
struct InfluenceSpec {
  std::vector<DesignPoint> reference_sample;
  int half_dim = 0;
};

// Risk-aligned distance d: Theta x Theta -> [0,1] with d(t,t)=0, symmetric.
struct DistanceSpec {
  enum class Kind { First, Max, Kendall, EuclideanScaled, Influence };
  Kind kind = Kind::First;
  double scale = 4.0;  // EuclideanScaled only
  std::shared_ptr<const InfluenceSpec> influence;

  static DistanceSpec first() { return {Kind::First, 0.0, nullptr}; }
  static DistanceSpec max() { return {Kind::Max, 0.0, nullptr}; }
  static DistanceSpec kendall() { return {Kind::Kendall, 0.0, nullptr}; }
  static DistanceSpec euclidean_scaled(double scale = 4.0) {
    require(scale > 0.0, "DistanceSpec: scale must be > 0");
    return {Kind::EuclideanScaled, scale, nullptr};
  }
  static DistanceSpec make_influence(std::shared_ptr<const InfluenceSpec> spec) {
    require(spec && !spec->reference_sample.empty(),
            "DistanceSpec: influence needs a nonempty reference sample");
    return {Kind::Influence, 0.0, std::move(spec)};
  }
};

const char* to_string(DistanceSpec::Kind kind);

// Sign disagreement on the first coordinate; sign(0) treated as +1.
double d_first(const ParamVector& t1, const ParamVector& t2);

// Disagreement on argmax_i |theta_i|, ties broken by lowest index.
double d_max(const ParamVector& t1, const ParamVector& t2);

// (1 - tau_b(|t1|, |t2|)) / 2 with the tie-adjusted Kendall correlation.
double d_kendall(const ParamVector& t1, const ParamVector& t2);

// min(1, |t1 - t2| / scale).
double d_euclidean_scaled(const ParamVector& t1, const ParamVector& t2,
                          double scale);

// Fraction of reference covariates whose restricted inner product changes
// sign between t1 and t2.
double d_influence(const ParamVector& t1, const ParamVector& t2,
                   const InfluenceSpec& spec);

// Tie-adjusted Kendall correlation (tau-b). Both-constant inputs count as
// perfectly concordant; a single constant input yields 0.
double kendall_tau_b(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

double evaluate(const DistanceSpec& spec, const ParamVector& t1,
                const ParamVector& t2);

using DistanceFn = std::function<double(const ParamVector&, const ParamVector&)>;

DistanceFn make_distance_fn(const DistanceSpec& spec);

// Distance for finite-class parameters embedded as 1-d index vectors.
DistanceFn table_distance_fn(Eigen::MatrixXd table);

}  // namespace pdbal
