#include "pdbal/distance.hpp"

#include <algorithm>
#include <cmath>

namespace pdbal {

namespace {

// sign(0) := +1; the prior is continuous so exact zeros have measure zero,
// and a fixed convention keeps the distance deterministic.
inline int sign_pos(double v) { return v < 0.0 ? -1 : 1; }

inline Eigen::Index argmax_abs(const ParamVector& t) {
  Eigen::Index best = 0;
  double best_val = std::abs(t[0]);
  for (Eigen::Index i = 1; i < t.size(); ++i) {
    const double v = std::abs(t[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

}  // namespace

const char* to_string(DistanceSpec::Kind kind) {
  switch (kind) {
    case DistanceSpec::Kind::First: return "first";
    case DistanceSpec::Kind::Max: return "max";
    case DistanceSpec::Kind::Kendall: return "kendall";
    case DistanceSpec::Kind::EuclideanScaled: return "euclidean";
    case DistanceSpec::Kind::Influence: return "influence";
  }
  return "?";
}

double d_first(const ParamVector& t1, const ParamVector& t2) {
  require(t1.size() > 0 && t1.size() == t2.size(),
          "d_first: nonempty equal-length vectors required");
  return sign_pos(t1[0]) != sign_pos(t2[0]) ? 1.0 : 0.0;
}

double d_max(const ParamVector& t1, const ParamVector& t2) {
  require(t1.size() > 0 && t1.size() == t2.size(),
          "d_max: nonempty equal-length vectors required");
  return argmax_abs(t1) != argmax_abs(t2) ? 1.0 : 0.0;
}

double kendall_tau_b(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  require(a.size() == b.size() && a.size() >= 2,
          "kendall_tau_b: need equal lengths >= 2");
  const Eigen::Index n = a.size();
  long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0 && db == 0.0) continue;  // tied in both, excluded
      if (da == 0.0) {
        ++ties_a;
      } else if (db == 0.0) {
        ++ties_b;
      } else if (da * db > 0.0) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double na = double(concordant + discordant + ties_a);
  const double nb = double(concordant + discordant + ties_b);
  if (na == 0.0 && nb == 0.0) return 1.0;  // both constant
  if (na == 0.0 || nb == 0.0) return 0.0;  // exactly one constant
  return double(concordant - discordant) / std::sqrt(na * nb);
}

double d_kendall(const ParamVector& t1, const ParamVector& t2) {
  require(t1.size() >= 2 && t1.size() == t2.size(),
          "d_kendall: need equal lengths >= 2");
  const double tau = kendall_tau_b(t1.cwiseAbs(), t2.cwiseAbs());
  return 0.5 * (1.0 - tau);
}

double d_euclidean_scaled(const ParamVector& t1, const ParamVector& t2,
                          double scale) {
  require(scale > 0.0, "d_euclidean_scaled: scale must be > 0");
  require(t1.size() == t2.size(), "d_euclidean_scaled: lengths differ");
  return std::min(1.0, (t1 - t2).norm() / scale);
}

double d_influence(const ParamVector& t1, const ParamVector& t2,
                   const InfluenceSpec& spec) {
  require(!spec.reference_sample.empty(),
          "d_influence: empty reference sample");
  const int k = spec.half_dim;
  require(k >= 1 && k <= t1.size() && t1.size() == t2.size(),
          "d_influence: invalid half_dim");
  // TODO: cache per-theta sign patterns if this shows up hot in profiles
  // (avg_diameter over a large ensemble evaluates O(m^2) pairs).
  long long flips = 0;
  for (const auto& x : spec.reference_sample) {
    const double a = x.head(k).dot(t1.head(k));
    const double b = x.head(k).dot(t2.head(k));
    if (sign_pos(a) != sign_pos(b)) ++flips;
  }
  return double(flips) / double(spec.reference_sample.size());
}

double evaluate(const DistanceSpec& spec, const ParamVector& t1,
                const ParamVector& t2) {
  switch (spec.kind) {
    case DistanceSpec::Kind::First: return d_first(t1, t2);
    case DistanceSpec::Kind::Max: return d_max(t1, t2);
    case DistanceSpec::Kind::Kendall: return d_kendall(t1, t2);
    case DistanceSpec::Kind::EuclideanScaled:
      return d_euclidean_scaled(t1, t2, spec.scale);
    case DistanceSpec::Kind::Influence:
      return d_influence(t1, t2, *spec.influence);
  }
  return 0.0;
}

DistanceFn make_distance_fn(const DistanceSpec& spec) {
  return [spec](const ParamVector& a, const ParamVector& b) {
    return evaluate(spec, a, b);
  };
}

DistanceFn table_distance_fn(Eigen::MatrixXd table) {
  auto shared = std::make_shared<Eigen::MatrixXd>(std::move(table));
  return [shared](const ParamVector& a, const ParamVector& b) {
    const auto i = static_cast<Eigen::Index>(a[0]);
    const auto j = static_cast<Eigen::Index>(b[0]);
    return (*shared)(i, j);
  };
}

}  // namespace pdbal
