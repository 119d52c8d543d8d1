#pragma once

#include <cmath>

namespace pdbal {

// Digamma via upward recurrence into the asymptotic region.
inline double digamma(double x) {
  double r = 0.0;
  while (x < 10.0) {
    r -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // psi(x) ~ ln x - 1/(2x) - sum B_2n / (2n x^2n)
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return r + std::log(x) - 0.5 * inv - series;
}

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

inline double log_binomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// x * log(x), continuous at 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Entropy of Bernoulli(p) in nats.
inline double binary_entropy(double p) { return -xlogx(p) - xlogx(1.0 - p); }

inline double sigmoid(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
inline double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

}  // namespace pdbal
