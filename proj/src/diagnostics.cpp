#include "pdbal/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pdbal/acquisition.hpp"
#include "pdbal/likelihood.hpp"
#include "pdbal/quadrature.hpp"
#include "pdbal/special.hpp"

namespace pdbal {

double avg_diameter(const FinitePosterior& post, const Eigen::MatrixXd& dist) {
  const std::size_t n = post.weights.size();
  double acc = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      acc += post.weights[a] * post.weights[b] * dist(a, b);
  return acc;
}

double avg_diameter(const PosteriorEnsemble& ens, const DistanceFn& dist) {
  const std::size_t m = ens.size();
  require(m >= 2, "avg_diameter: need at least two samples");
  double acc = 0.0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      acc += dist(ens.samples[a], ens.samples[b]);
  return 2.0 * acc / (double(m) * double(m - 1));
}

SplitReport splitting_value(const FinitePosterior& post, std::size_t design,
                            const Eigen::MatrixXd& dist) {
  SplitReport report;
  report.avg_diam = avg_diameter(post, dist);
  require(report.avg_diam > 0.0, "splitting_value: average diameter is zero");
  report.s_value = pdbal_score_exact(post, design, dist);
  report.rho_raw = 1.0 - report.s_value / report.avg_diam;
  report.rho = std::clamp(report.rho_raw, 0.0, 1.0);
  report.clamped = report.rho != report.rho_raw;
  return report;
}

namespace {

// Per-design entropy, required constant across parameters.
double common_entropy(const FiniteModelClass& cls, std::size_t design) {
  const double h0 = cls.row_entropy(0, design);
  for (std::size_t p = 1; p < cls.n_params(); ++p)
    if (std::abs(cls.row_entropy(p, design) - h0) > 1e-9)
      throw std::invalid_argument(
          "diagnostics: per-design entropy varies across parameters");
  return h0;
}

}  // namespace

std::vector<PotentialStep> potential_trace(
    const FiniteModelClass& cls,
    const std::vector<std::pair<std::size_t, std::size_t>>& queries,
    const Eigen::MatrixXd& dist) {
  FinitePosterior post;
  post.model = std::shared_ptr<const FiniteModelClass>(&cls, [](auto*) {});
  post.weights = cls.prior_weights;

  std::vector<PotentialStep> trace;
  double w = 1.0;
  PotentialStep step0{1.0, avg_diameter(post, dist), 0.0};
  step0.product = step0.avg_diam;
  trace.push_back(step0);

  for (const auto& [design, outcome] : queries) {
    const double h = common_entropy(cls, design);
    auto update = finite_posterior_update(post, design, outcome);
    w *= std::exp(h) * update.z_ratio;
    post = std::move(update.posterior);
    PotentialStep step;
    step.w = w;
    step.avg_diam = avg_diameter(post, dist);
    step.product = w * w * step.avg_diam;
    trace.push_back(step);
  }
  return trace;
}

CheckReport check_potential_contraction(const FinitePosterior& post, std::size_t design,
                         const Eigen::MatrixXd& dist) {
  CheckReport report;
  report.name = "potential_contraction";
  const auto& cls = *post.model;
  const double h = common_entropy(cls, design);
  const SplitReport split = splitting_value(post, design, dist);

  // Exact expectation over outcomes drawn from the posterior mixture of the
  // updated potential-weighted diameter, relative to W_t = 1.
  double lhs = 0.0;
  for (std::size_t y = 0; y < cls.n_outcomes(); ++y) {
    const double pred = finite_predictive(post, design, y);
    if (pred <= 0.0) continue;
    const auto update = finite_posterior_update(post, design, y);
    const double w_next = std::exp(h) * update.z_ratio;
    lhs += pred * w_next * w_next * avg_diameter(update.posterior, dist);
  }
  const double rhs = (1.0 - split.rho_raw) * split.avg_diam;
  report.margin = rhs - lhs;
  report.passed = report.margin >= -1e-12;
  return report;
}

CheckReport check_combine_split(const FinitePosterior& post,
                                std::size_t design1, std::size_t design2,
                                const Eigen::MatrixXd& dist) {
  CheckReport report;
  report.name = "splitting_subadditivity";
  const auto& cls = *post.model;
  const double h1 = common_entropy(cls, design1);
  const double h2 = common_entropy(cls, design2);
  if (std::abs(h1 - h2) > 1e-9) {
    report.skipped = true;
    report.reason = "H(x1) != H(x2)";
    return report;
  }
  const double h = h1;
  const double ad = avg_diameter(post, dist);
  if (ad <= 0.0) {
    report.skipped = true;
    report.reason = "zero average diameter";
    return report;
  }
  const double rho1 = splitting_value(post, design1, dist).rho_raw;
  const double rho2 = splitting_value(post, design2, dist).rho_raw;
  if (!(rho1 + rho2 < 1.0)) {
    report.skipped = true;
    report.reason = "rho1 + rho2 >= 1";
    return report;
  }

  // Exact combined score over the product outcome space; the combined query
  // carries entropy 2h, hence weight exp(4h).
  const std::size_t n = cls.n_params();
  const std::size_t K = cls.n_outcomes();
  double s12 = 0.0;
  for (std::size_t ts = 0; ts < n; ++ts) {
    Eigen::MatrixXd pair_factor = Eigen::MatrixXd::Ones(n, n);
    for (int q = 0; q < 2; ++q) {
      const std::size_t design = q == 0 ? design1 : design2;
      Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(n, n);
      for (std::size_t y = 0; y < K; ++y) {
        const double gen = cls.prob(ts, design, y);
        if (gen == 0.0) continue;
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = 0; b < n; ++b)
            factor(a, b) += gen * cls.prob(a, design, y) * cls.prob(b, design, y);
      }
      pair_factor = pair_factor.cwiseProduct(factor);
    }
    double inner = 0.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        inner += post.weights[a] * post.weights[b] * dist(a, b) *
                 pair_factor(a, b);
    s12 += post.weights[ts] * std::exp(4.0 * h) * inner;
  }
  const double rho12 = 1.0 - s12 / ad;

  if (h == 0.0) {
    report.reason = "h=0 bound";
    report.margin = (rho1 + rho2) - rho12;
  } else if (h >= 0.0 && h < (rho1 + rho2) / 6.0) {
    report.reason = "factor-2 bound";
    report.margin = 2.0 * (rho1 + rho2) - rho12;
  } else {
    report.skipped = true;
    report.reason = "entropy outside the bound range";
    return report;
  }
  report.passed = report.margin >= -1e-12;
  return report;
}

std::vector<double> random_simplex(std::size_t n, RandomStream& rng) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& v : w) {
    v = -std::log(rng.uniform_pos());
    total += v;
  }
  for (auto& v : w) v /= total;
  return w;
}

Eigen::MatrixXd random_distance_table(std::size_t n, RandomStream& rng) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      d(a, b) = d(b, a) = rng.uniform();
  return d;
}

FiniteModelClass random_conforming_class(const ClassGenOptions& opts,
                                         RandomStream& rng) {
  FiniteModelClass cls;
  const int n =
      opts.min_params + int(rng.uniform_int(opts.max_params - opts.min_params + 1));
  const int K = opts.min_outcomes +
                int(rng.uniform_int(opts.max_outcomes - opts.min_outcomes + 1));
  cls.params.resize(n);
  for (int p = 0; p < n; ++p) cls.params[p] = "m" + std::to_string(p);
  cls.outcome_space.resize(K);
  for (int y = 0; y < K; ++y) cls.outcome_space[y] = Outcome::category(y);
  cls.n_designs = opts.n_designs;
  cls.probs.assign(std::size_t(n) * opts.n_designs * K, 0.0);
  cls.prior_weights = random_simplex(n, rng);

  // One base row per design (shared across designs for Deterministic and
  // LowEntropy so combined-query entropies match); each parameter's row is a
  // cyclic shift placing the modal mass on that parameter's answer.
  std::vector<double> base(K);
  switch (opts.noise) {
    case ClassNoise::Deterministic:
      base.assign(K, 0.0);
      base[0] = 1.0;
      break;
    case ClassNoise::LowEntropy: {
      const double eps = rng.uniform(1e-4, 2e-3);
      base.assign(K, eps / (K - 1));
      base[0] = 1.0 - eps;
      break;
    }
    case ClassNoise::Dirichlet:
      base = random_simplex(K, rng);
      break;
  }

  for (std::size_t x = 0; x < cls.n_designs; ++x) {
    std::vector<double> design_base = base;
    if (opts.noise == ClassNoise::Dirichlet)
      design_base = random_simplex(K, rng);
    for (int p = 0; p < n; ++p) {
      // Skewed answer assignment: weaker splits than uniform assignment.
      int answer;
      if (rng.uniform() < opts.answer_skew)
        answer = 0;
      else
        answer = 1 + int(rng.uniform_int(K - 1));
      for (int y = 0; y < K; ++y)
        cls.prob(p, x, (answer + y) % K) = design_base[y];
    }
  }
  cls.validate();
  return cls;
}

FiniteModelClass random_free_class(int max_params, int max_outcomes,
                                   int n_designs, RandomStream& rng) {
  FiniteModelClass cls;
  const int n = 3 + int(rng.uniform_int(std::uint64_t(max_params - 2)));
  const int K = 2 + int(rng.uniform_int(std::uint64_t(max_outcomes - 1)));
  cls.params.resize(n);
  for (int p = 0; p < n; ++p) cls.params[p] = "m" + std::to_string(p);
  cls.outcome_space.resize(K);
  for (int y = 0; y < K; ++y) cls.outcome_space[y] = Outcome::category(y);
  cls.n_designs = std::size_t(n_designs);
  cls.probs.resize(std::size_t(n) * n_designs * K);
  cls.prior_weights = random_simplex(n, rng);
  for (int p = 0; p < n; ++p)
    for (int x = 0; x < n_designs; ++x) {
      const auto row = random_simplex(K, rng);
      for (int y = 0; y < K; ++y) cls.prob(p, x, y) = row[y];
    }
  cls.validate();
  return cls;
}

// --- Kernel oracle suite ----------------------------------------------------

namespace {

double gaussian_density(double y, double mu, double var) {
  const double r = y - mu;
  return std::exp(-0.5 * r * r / var) / std::sqrt(2.0 * M_PI * var);
}

// Quadrature route for the spherical Gaussian kernel: the d-dimensional
// integral factorizes over coordinates.
double gaussian_kernel_quadrature(const Eigen::VectorXd& m1, double v1,
                                  const Eigen::VectorXd& m2, double v2,
                                  const Eigen::VectorXd& m3, double v3) {
  double out = 1.0;
  const double sd = std::sqrt(std::max({v1, v2, v3}));
  for (Eigen::Index i = 0; i < m1.size(); ++i) {
    const double lo = std::min({m1[i], m2[i], m3[i]}) - 12.0 * sd;
    const double hi = std::max({m1[i], m2[i], m3[i]}) + 12.0 * sd;
    out *= integrate_adaptive(
        [&](double y) {
          return gaussian_density(y, m1[i], v1) * gaussian_density(y, m2[i], v2) *
                 gaussian_density(y, m3[i], v3);
        },
        lo, hi, 1e-12, 1e-300);
  }
  return out;
}

double exponential_kernel_quadrature(double l1, double l2, double l3) {
  const double hi = 60.0 / (l1 + l2 + l3);
  return integrate_adaptive(
      [&](double y) {
        return l1 * l2 * l3 * std::exp(-(l1 + l2 + l3) * y);
      },
      0.0, hi, 1e-12, 1e-300);
}

// Quadrature route for the gamma kernel. The density product collapses to
// C * y^{A-1} e^{-B y} with A = sum(a) - 2 and B = sum(b); substituting
// y = e^v gives the everywhere-smooth integrand exp(A v - B e^v), with an
// exponential left tail (rate A) and a doubly-exponential right tail.
double gamma_kernel_quadrature(double a1, double b1, double a2, double b2,
                               double a3, double b3) {
  const double A = a1 + a2 + a3 - 2.0;
  const double B = b1 + b2 + b3;
  const double logC = a1 * std::log(b1) + a2 * std::log(b2) +
                      a3 * std::log(b3) - std::lgamma(a1) - std::lgamma(a2) -
                      std::lgamma(a3);
  // Left tail mass below v0 is e^{A v0} / A; pin it 18 digits under the
  // integral's own magnitude Gamma(A) / B^A.
  const double v0 =
      (std::log(1e-18 * A) + std::lgamma(A) - A * std::log(B)) / A;
  const double v1 = std::log((A + 60.0 * std::sqrt(A) + 60.0) / B);
  const double integral = integrate_adaptive(
      [&](double v) { return std::exp(A * v - B * std::exp(v)); }, v0, v1,
      1e-12, 1e-300, 48);
  return std::exp(logC) * integral;
}

double geometric_series(double p1, double p2, double p3) {
  const double q = (1.0 - p1) * (1.0 - p2) * (1.0 - p3);  // common ratio
  const double coef = p1 * p2 * p3;
  double acc = 0.0, factor = 1.0;
  for (int k = 0; k < 1000000; ++k) {
    acc += coef * factor;
    factor *= q;
    // Exact geometric tail: coef * factor / (1 - q).
    if (coef * factor <= 1e-15 * (1.0 - q) * acc) return acc;
  }
  throw std::runtime_error("geometric_series: truncation cap reached");
}

double negbinom_log_pmf(long long k, int r, double p) {
  return log_binomial(double(k + r - 1), double(k)) + r * std::log1p(-p) +
         k * std::log(p);
}

double negbinom_series(int r, double p1, double p2, double p3) {
  double acc = 0.0;
  const double ratio = p1 * p2 * p3;  // asymptotic term ratio
  for (long long k = 0;; ++k) {
    const double term = std::exp(negbinom_log_pmf(k, r, p1) +
                                 negbinom_log_pmf(k, r, p2) +
                                 negbinom_log_pmf(k, r, p3));
    acc += term;
    if (k > 10LL * r && term <= 1e-16 * (1.0 - ratio) * acc) break;
    if (k > 2000000)
      throw std::runtime_error("negbinom_series: truncation cap reached");
  }
  return acc;
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace

std::vector<CheckReport> kernel_oracle_checks(std::uint64_t seed,
                                              int n_per_kernel,
                                              bool inject_fault) {
  RandomStream rng(seed);
  const double fault = inject_fault ? 1.0 + 1e-5 : 1.0;
  std::vector<CheckReport> reports;

  auto run = [&](const std::string& name, double tol, auto&& trial) {
    CheckReport r;
    r.name = name;
    double worst = 0.0;
    for (int t = 0; t < n_per_kernel; ++t) worst = std::max(worst, trial());
    r.margin = tol - worst;
    r.passed = r.margin >= 0.0;
    reports.push_back(std::move(r));
  };

  run("kernel_gaussian_vs_quadrature", 1e-8, [&]() {
    const int d = rng.bernoulli(0.5) ? 1 : 3;
    Eigen::VectorXd m1(d), m2(d), m3(d);
    for (int i = 0; i < d; ++i) {
      m1[i] = rng.uniform(-2.0, 2.0);
      m2[i] = rng.uniform(-2.0, 2.0);
      m3[i] = rng.uniform(-2.0, 2.0);
    }
    const double v1 = rng.uniform(0.3, 3.0);
    const double v2 = rng.uniform(0.3, 3.0);
    const double v3 = rng.uniform(0.3, 3.0);
    const double closed =
        fault * triple_kernel_gaussian(m1, v1, m2, v2, m3, v3);
    return rel_err(closed, gaussian_kernel_quadrature(m1, v1, m2, v2, m3, v3));
  });

  run("kernel_exponential_vs_quadrature", 1e-9, [&]() {
    const double l1 = rng.uniform(0.2, 4.0);
    const double l2 = rng.uniform(0.2, 4.0);
    const double l3 = rng.uniform(0.2, 4.0);
    const double closed = fault * triple_kernel_exponential(l1, l2, l3);
    return rel_err(closed, exponential_kernel_quadrature(l1, l2, l3));
  });

  run("kernel_gamma_vs_quadrature", 1e-9, [&]() {
    double a1, a2, a3;
    do {
      a1 = rng.uniform(0.3, 4.0);
      a2 = rng.uniform(0.3, 4.0);
      a3 = rng.uniform(0.3, 4.0);
    } while (a1 + a2 + a3 <= 2.2);
    const double b1 = rng.uniform(0.3, 3.0);
    const double b2 = rng.uniform(0.3, 3.0);
    const double b3 = rng.uniform(0.3, 3.0);
    const double closed = fault * triple_kernel_gamma(a1, b1, a2, b2, a3, b3);
    return rel_err(closed, gamma_kernel_quadrature(a1, b1, a2, b2, a3, b3));
  });

  run("kernel_geometric_vs_series", 1e-10, [&]() {
    const double p1 = rng.uniform(0.05, 0.95);
    const double p2 = rng.uniform(0.05, 0.95);
    const double p3 = rng.uniform(0.05, 0.95);
    const double closed = fault * triple_kernel_geometric(p1, p2, p3);
    return rel_err(closed, geometric_series(p1, p2, p3));
  });

  run("kernel_negbinom_vs_series", 1e-10, [&]() {
    const int r = 1 + int(rng.uniform_int(8));
    const double p1 = rng.uniform(0.05, 0.9);
    const double p2 = rng.uniform(0.05, 0.9);
    const double p3 = rng.uniform(0.05, 0.9);
    const double closed = fault * triple_kernel_negbinom(r, p1, p2, p3);
    return rel_err(closed, negbinom_series(r, p1, p2, p3));
  });

  run("kernel_categorical_vs_sum", 1e-15, [&]() {
    const std::size_t K = 5;
    const auto p1 = random_simplex(K, rng);
    const auto p2 = random_simplex(K, rng);
    const auto p3 = random_simplex(K, rng);
    const double closed = fault * triple_kernel_categorical(p1, p2, p3);
    double direct = 0.0;
    for (std::size_t y = 0; y < K; ++y) direct += p1[y] * p2[y] * p3[y];
    return rel_err(closed, direct);
  });

  return reports;
}

SuiteResult contraction_suite(std::uint64_t seed, int n_classes) {
  SuiteResult result;
  result.name = "potential_contraction";
  RandomStream rng(seed);
  ClassGenOptions opts;
  opts.noise = ClassNoise::Dirichlet;
  opts.n_designs = 1;
  for (int i = 0; i < n_classes; ++i) {
    RandomStream class_rng = rng.child(std::uint64_t(i));
    auto cls = std::make_shared<FiniteModelClass>(
        random_conforming_class(opts, class_rng));
    const Eigen::MatrixXd dist =
        random_distance_table(cls->n_params(), class_rng);
    const auto post = FinitePosterior::prior(cls);
    const CheckReport report = check_potential_contraction(post, 0, dist);
    ++result.attempts;
    ++result.checked;
    result.min_margin = std::min(result.min_margin, report.margin);
    if (!report.passed) ++result.violations;
  }
  return result;
}

SuiteResult subadditivity_suite(std::uint64_t seed, int n_classes, ClassNoise noise) {
  SuiteResult result;
  result.name = noise == ClassNoise::Deterministic ? "subadditivity_deterministic"
                                                   : "subadditivity_low_entropy";
  RandomStream rng(seed);
  ClassGenOptions opts;
  opts.noise = noise;
  opts.n_designs = 2;
  const int max_attempts = 80 * n_classes;
  for (int i = 0; result.checked < n_classes && i < max_attempts; ++i) {
    RandomStream class_rng = rng.child(std::uint64_t(i));
    auto cls = std::make_shared<FiniteModelClass>(
        random_conforming_class(opts, class_rng));
    const Eigen::MatrixXd dist =
        random_distance_table(cls->n_params(), class_rng);
    const auto post = FinitePosterior::prior(cls);
    const CheckReport report = check_combine_split(post, 0, 1, dist);
    ++result.attempts;
    if (report.skipped) continue;
    ++result.checked;
    result.min_margin = std::min(result.min_margin, report.margin);
    if (!report.passed) ++result.violations;
  }
  return result;
}

}  // namespace pdbal
