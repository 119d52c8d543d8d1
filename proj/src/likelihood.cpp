#include "pdbal/likelihood.hpp"

#include <cmath>
#include <limits>

#include "pdbal/special.hpp"

namespace pdbal {

namespace {

double linear_predictor(const ParamVector& theta, const DesignPoint& x) {
  require(theta.size() == x.size(),
          "likelihood: theta and x dimensions differ");
  const double eta = theta.dot(x);
  if (!std::isfinite(eta))
    throw std::invalid_argument("likelihood: non-finite linear predictor");
  return eta;
}

void check_tag(const LikelihoodFamily& family, const Outcome& y) {
  if (y.tag != family.outcome_tag())
    throw std::invalid_argument(std::string("likelihood: outcome tag ") +
                                to_string(y.tag) + " does not match family " +
                                to_string(family.kind));
}

}  // namespace

const char* to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::LinearGaussian: return "LinearGaussian";
    case FamilyKind::Logistic: return "Logistic";
    case FamilyKind::Poisson: return "Poisson";
    case FamilyKind::BetaMean: return "BetaMean";
  }
  return "?";
}

OutcomeTag LikelihoodFamily::outcome_tag() const {
  switch (kind) {
    case FamilyKind::LinearGaussian: return OutcomeTag::Real;
    case FamilyKind::Logistic: return OutcomeTag::Binary;
    case FamilyKind::Poisson: return OutcomeTag::Count;
    case FamilyKind::BetaMean: return OutcomeTag::UnitInterval;
  }
  return OutcomeTag::Real;
}

double log_density(const LikelihoodFamily& family, const ParamVector& theta,
                   const DesignPoint& x, const Outcome& y) {
  check_tag(family, y);
  const double eta = linear_predictor(theta, x);
  switch (family.kind) {
    case FamilyKind::LinearGaussian: {
      const double r = y.value - eta;
      return -0.5 * r * r / family.noise_var -
             0.5 * std::log(2.0 * M_PI * family.noise_var);
    }
    case FamilyKind::Logistic:
      // log sigmoid(eta) for y=1, log sigmoid(-eta) for y=0
      return y.integer() == 1 ? -softplus(-eta) : -softplus(eta);
    case FamilyKind::Poisson: {
      const double k = y.value;
      return k * eta - std::exp(eta) - std::lgamma(k + 1.0);
    }
    case FamilyKind::BetaMean: {
      if (!(y.value > 0.0 && y.value < 1.0))
        throw std::domain_error(
            "BetaMean: density undefined at the {0,1} boundary");
      const double mu = sigmoid(eta);
      const double a = family.precision * mu;
      const double b = family.precision * (1.0 - mu);
      return (a - 1.0) * std::log(y.value) + (b - 1.0) * std::log1p(-y.value) -
             log_beta(a, b);
    }
  }
  return -std::numeric_limits<double>::infinity();
}

Outcome sample_outcome(const LikelihoodFamily& family, const ParamVector& theta,
                       const DesignPoint& x, RandomStream& rng) {
  const double eta = linear_predictor(theta, x);
  switch (family.kind) {
    case FamilyKind::LinearGaussian:
      return Outcome::real(rng.normal(eta, std::sqrt(family.noise_var)));
    case FamilyKind::Logistic:
      return Outcome::binary(rng.bernoulli(sigmoid(eta)) ? 1 : 0);
    case FamilyKind::Poisson:
      return Outcome::count(rng.poisson(std::exp(eta)));
    case FamilyKind::BetaMean: {
      const double mu = sigmoid(eta);
      double v = rng.beta(family.precision * mu, family.precision * (1.0 - mu));
      // Guard floating-point underflow to an exact boundary value.
      const double tiny = 1e-300;
      v = std::min(std::max(v, tiny), 1.0 - 1e-16);
      return Outcome::unit_interval(v);
    }
  }
  return Outcome::real(0.0);
}

double poisson_entropy(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::domain_error("poisson_entropy: rate must be finite positive");
  const double log_lambda = std::log(lambda);
  double h = 0.0;
  double cum = 0.0;
  double logp = -lambda;  // k = 0
  const long long cap =
      200 + 4 * static_cast<long long>(lambda + 40.0 * std::sqrt(lambda));
  for (long long k = 0; k <= cap; ++k) {
    if (k > 0) logp += log_lambda - std::log(double(k));
    const double p = std::exp(logp);
    h -= p * logp;
    cum += p;
    if (k > static_cast<long long>(lambda) && 1.0 - cum < 1e-12) return h;
  }
  throw std::runtime_error("poisson_entropy: truncation cap reached");
}

double entropy(const LikelihoodFamily& family, const ParamVector& theta,
               const DesignPoint& x) {
  switch (family.kind) {
    case FamilyKind::LinearGaussian:
      // Independent of theta and x.
      return 0.5 * std::log(2.0 * M_PI * M_E * family.noise_var);
    case FamilyKind::Logistic:
      return binary_entropy(sigmoid(linear_predictor(theta, x)));
    case FamilyKind::Poisson:
      return poisson_entropy(std::exp(linear_predictor(theta, x)));
    case FamilyKind::BetaMean: {
      const double mu = sigmoid(linear_predictor(theta, x));
      const double a = family.precision * mu;
      const double b = family.precision * (1.0 - mu);
      return log_beta(a, b) - (a - 1.0) * digamma(a) - (b - 1.0) * digamma(b) +
             (a + b - 2.0) * digamma(a + b);
    }
  }
  return 0.0;
}

Moments predictive_moments(const LikelihoodFamily& family,
                           const ParamVector& theta, const DesignPoint& x) {
  const double eta = linear_predictor(theta, x);
  switch (family.kind) {
    case FamilyKind::LinearGaussian:
      return {eta, family.noise_var};
    case FamilyKind::Logistic: {
      const double mu = sigmoid(eta);
      return {mu, mu * (1.0 - mu)};
    }
    case FamilyKind::Poisson: {
      const double lambda = std::exp(eta);
      return {lambda, lambda};
    }
    case FamilyKind::BetaMean: {
      const double mu = sigmoid(eta);
      return {mu, mu * (1.0 - mu) / (1.0 + family.precision)};
    }
  }
  return {};
}

double triple_kernel_gaussian(const Eigen::VectorXd& mu1, double var1,
                              const Eigen::VectorXd& mu2, double var2,
                              const Eigen::VectorXd& mu3, double var3) {
  if (!(var1 > 0.0 && var2 > 0.0 && var3 > 0.0))
    throw std::domain_error("triple_kernel_gaussian: variances must be > 0");
  require(mu1.size() == mu2.size() && mu2.size() == mu3.size(),
          "triple_kernel_gaussian: mean dimensions differ");
  const double d = double(mu1.size());
  const double alpha = var1 * var2 + var2 * var3 + var1 * var3;
  const double pair_sum = var3 * (mu1 - mu2).squaredNorm() +
                          var1 * (mu2 - mu3).squaredNorm() +
                          var2 * (mu1 - mu3).squaredNorm();
  const double log_val = -0.5 * d * std::log(alpha * 4.0 * M_PI * M_PI) -
                         pair_sum / (2.0 * alpha);
  return std::exp(log_val);
}

double triple_kernel_categorical(std::span<const double> p1,
                                 std::span<const double> p2,
                                 std::span<const double> p3) {
  require(p1.size() == p2.size() && p2.size() == p3.size(),
          "triple_kernel_categorical: simplex dimensions differ");
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, out = 0.0;
  for (std::size_t y = 0; y < p1.size(); ++y) {
    if (p1[y] < 0.0 || p2[y] < 0.0 || p3[y] < 0.0)
      throw std::invalid_argument("triple_kernel_categorical: negative mass");
    s1 += p1[y];
    s2 += p2[y];
    s3 += p3[y];
    out += p1[y] * p2[y] * p3[y];
  }
  const double tol = 1e-12;
  if (std::abs(s1 - 1.0) > tol || std::abs(s2 - 1.0) > tol ||
      std::abs(s3 - 1.0) > tol)
    throw std::invalid_argument(
        "triple_kernel_categorical: vector not on the simplex");
  return out;
}

double triple_kernel_exponential(double rate1, double rate2, double rate3) {
  if (!(rate1 > 0.0 && rate2 > 0.0 && rate3 > 0.0))
    throw std::domain_error("triple_kernel_exponential: rates must be > 0");
  return rate1 * rate2 * rate3 / (rate1 + rate2 + rate3);
}

double triple_kernel_geometric(double p1, double p2, double p3) {
  if (!(p1 > 0.0 && p1 <= 1.0 && p2 > 0.0 && p2 <= 1.0 && p3 > 0.0 && p3 <= 1.0))
    throw std::domain_error("triple_kernel_geometric: p must be in (0,1]");
  const double denom =
      p1 + p2 + p3 - p1 * p2 - p2 * p3 - p1 * p3 + p1 * p2 * p3;
  return p1 * p2 * p3 / denom;
}

double triple_kernel_gamma(double a1, double b1, double a2, double b2,
                           double a3, double b3) {
  if (!(a1 > 0.0 && a2 > 0.0 && a3 > 0.0 && b1 > 0.0 && b2 > 0.0 && b3 > 0.0))
    throw std::domain_error("triple_kernel_gamma: parameters must be > 0");
  const double a_sum = a1 + a2 + a3;
  if (!(a_sum > 2.0))
    throw std::domain_error(
        "triple_kernel_gamma: alpha sum must exceed 2 (integral diverges)");
  const double log_val = a1 * std::log(b1) + a2 * std::log(b2) +
                         a3 * std::log(b3) + std::lgamma(a_sum - 2.0) -
                         (a_sum - 2.0) * std::log(b1 + b2 + b3) -
                         std::lgamma(a1) - std::lgamma(a2) - std::lgamma(a3);
  return std::exp(log_val);
}

double triple_kernel_negbinom(int r, double p1, double p2, double p3) {
  if (r < 1) throw std::domain_error("triple_kernel_negbinom: r must be >= 1");
  if (!(p1 > 0.0 && p1 < 1.0 && p2 > 0.0 && p2 < 1.0 && p3 > 0.0 && p3 < 1.0))
    throw std::domain_error("triple_kernel_negbinom: p must be in (0,1)");
  const double z = p1 * p2 * p3;
  const double log_pre =
      r * (std::log1p(-p1) + std::log1p(-p2) + std::log1p(-p3) -
           std::log1p(-z));
  const double log_ratio = std::log(4.0 * z) - 2.0 * std::log1p(-z);
  double sum = 0.0;
  for (int k = 0; k < r; ++k) {
    const double lt = log_binomial(r - 1.0, double(k)) -
                      2.0 * k * std::log(2.0) + std::lgamma(2.0 * k + r) -
                      std::lgamma(double(r)) - 2.0 * std::lgamma(k + 1.0) +
                      k * log_ratio;
    sum += std::exp(lt);
  }
  return std::exp(log_pre) * sum;
}

std::optional<double> triple_kernel(const LikelihoodFamily& family,
                                    const ParamVector& t1,
                                    const ParamVector& t2,
                                    const ParamVector& t3,
                                    const DesignPoint& x) {
  switch (family.kind) {
    case FamilyKind::LinearGaussian: {
      Eigen::VectorXd m1(1), m2(1), m3(1);
      m1[0] = linear_predictor(t1, x);
      m2[0] = linear_predictor(t2, x);
      m3[0] = linear_predictor(t3, x);
      return triple_kernel_gaussian(m1, family.noise_var, m2, family.noise_var,
                                    m3, family.noise_var);
    }
    case FamilyKind::Logistic: {
      const double m1 = sigmoid(linear_predictor(t1, x));
      const double m2 = sigmoid(linear_predictor(t2, x));
      const double m3 = sigmoid(linear_predictor(t3, x));
      const double p1[2] = {1.0 - m1, m1};
      const double p2[2] = {1.0 - m2, m2};
      const double p3[2] = {1.0 - m3, m3};
      return triple_kernel_categorical(p1, p2, p3);
    }
    case FamilyKind::Poisson:
    case FamilyKind::BetaMean:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace pdbal
