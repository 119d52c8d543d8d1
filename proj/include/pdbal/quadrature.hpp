#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdbal {

struct QuadratureRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre nodes/weights by Newton iteration on P_n.
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

template <class F>
double quad_fixed(const F& f, double a, double b, const QuadratureRule& rule) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * f(c + h * rule.nodes[i]);
  return h * sum;
}

namespace detail {

// Per-interval relative acceptance: for (near-)single-signed integrands the
// accumulated error stays relative to the total.
template <class F>
double adapt(const F& f, double a, double b, double whole, double rel_tol,
             double abs_tol, int depth, const QuadratureRule& rule,
             bool& converged) {
  const double mid = 0.5 * (a + b);
  const double left = quad_fixed(f, a, mid, rule);
  const double right = quad_fixed(f, mid, b, rule);
  const double sum = left + right;
  const double err = std::abs(sum - whole);
  if (err <= rel_tol * std::abs(sum) || err <= abs_tol || depth <= 0) {
    if (depth <= 0 && err > rel_tol * std::abs(sum) && err > abs_tol)
      converged = false;
    return sum;
  }
  return adapt(f, a, mid, left, rel_tol, abs_tol, depth - 1, rule, converged) +
         adapt(f, mid, b, right, rel_tol, abs_tol, depth - 1, rule, converged);
}

}  // namespace detail

// Adaptive Gauss-Legendre on [a,b]. Throws on runaway refinement so callers
// see a numerical error with diagnostics instead of a silently bad value.
template <class F>
double integrate_adaptive(const F& f, double a, double b,
                          double rel_tol = 1e-10, double abs_tol = 1e-14,
                          int max_depth = 40, int base_nodes = 15) {
  static thread_local QuadratureRule cached;
  static thread_local int cached_n = -1;
  if (cached_n != base_nodes) {
    cached = gauss_legendre(base_nodes);
    cached_n = base_nodes;
  }
  const double whole = quad_fixed(f, a, b, cached);
  bool converged = true;
  const double result = detail::adapt(f, a, b, whole, rel_tol, abs_tol,
                                      max_depth, cached, converged);
  if (!converged)
    throw std::runtime_error(
        "integrate_adaptive: refinement limit reached on [" +
        std::to_string(a) + ", " + std::to_string(b) + "]");
  return result;
}

}  // namespace pdbal
