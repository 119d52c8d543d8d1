#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pdbal {

// Candidate query x and model parameter theta are both plain real vectors;
// the scenario dimension d is carried by context.
using DesignPoint = Eigen::VectorXd;
using ParamVector = Eigen::VectorXd;

enum class OutcomeTag { Real, Count, Binary, Category, UnitInterval };

inline const char* to_string(OutcomeTag tag) {
  switch (tag) {
    case OutcomeTag::Real: return "Real";
    case OutcomeTag::Count: return "Count";
    case OutcomeTag::Binary: return "Binary";
    case OutcomeTag::Category: return "Category";
    case OutcomeTag::UnitInterval: return "UnitInterval";
  }
  return "?";
}

// A tagged observation y. Integer-valued tags store their value in the same
// double slot; accessors validate.
struct Outcome {
  OutcomeTag tag = OutcomeTag::Real;
  double value = 0.0;

  static Outcome real(double v) { return {OutcomeTag::Real, v}; }
  static Outcome count(long long k) {
    if (k < 0) throw std::invalid_argument("Outcome::count: negative count");
    return {OutcomeTag::Count, double(k)};
  }
  static Outcome binary(int b) {
    if (b != 0 && b != 1) throw std::invalid_argument("Outcome::binary: not 0/1");
    return {OutcomeTag::Binary, double(b)};
  }
  static Outcome category(long long k) {
    if (k < 0) throw std::invalid_argument("Outcome::category: negative index");
    return {OutcomeTag::Category, double(k)};
  }
  static Outcome unit_interval(double v) {
    if (!(v > 0.0 && v < 1.0))
      throw std::invalid_argument("Outcome::unit_interval: value not in (0,1)");
    return {OutcomeTag::UnitInterval, v};
  }

  long long integer() const { return static_cast<long long>(std::llround(value)); }

  bool operator==(const Outcome& o) const {
    return tag == o.tag && value == o.value;
  }
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite())
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

}  // namespace pdbal
