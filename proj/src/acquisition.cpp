#include "pdbal/acquisition.hpp"

#include <algorithm>
#include <cmath>

#include "pdbal/quadrature.hpp"
#include "pdbal/special.hpp"

namespace pdbal {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::PDBAL: return "PDBAL";
    case Strategy::Random: return "Random";
    case Strategy::Variance: return "Variance";
    case Strategy::EIG: return "EIG";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(char(std::tolower(c)));
  if (s == "pdbal") return Strategy::PDBAL;
  if (s == "random") return Strategy::Random;
  if (s == "variance" || s == "var") return Strategy::Variance;
  if (s == "eig" || s == "bald") return Strategy::EIG;
  throw std::invalid_argument("unknown strategy: " + name);
}

std::vector<Triple> draw_triples(int m, int count, RandomStream& rng) {
  require(m >= 3, "draw_triples: ensemble must have at least 3 members");
  require(count >= 1, "draw_triples: count must be >= 1");
  std::vector<Triple> out(count);
  for (auto& t : out) {
    int a, b, c;
    do {
      a = int(rng.uniform_int(std::uint64_t(m)));
      b = int(rng.uniform_int(std::uint64_t(m)));
      c = int(rng.uniform_int(std::uint64_t(m)));
    } while (a == b || b == c || a == c);
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    t = {a, b, c};
  }
  return out;
}

double pdbal_score_exact(const FinitePosterior& post, std::size_t design,
                         const Eigen::MatrixXd& dist) {
  const auto& cls = *post.model;
  const std::size_t n = cls.n_params();
  const std::size_t K = cls.n_outcomes();
  std::vector<double> gen_weight(n);  // w_ts * exp(2 H_ts)
  for (std::size_t p = 0; p < n; ++p)
    gen_weight[p] = post.weights[p] * std::exp(2.0 * cls.row_entropy(p, design));
  double s = 0.0;
  for (std::size_t y = 0; y < K; ++y) {
    double generator = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      generator += gen_weight[p] * cls.prob(p, design, y);
    double pair_mass = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      const double wa = post.weights[a] * cls.prob(a, design, y);
      if (wa == 0.0) continue;
      for (std::size_t b = 0; b < n; ++b)
        pair_mass += wa * post.weights[b] * cls.prob(b, design, y) * dist(a, b);
    }
    s += generator * pair_mass;
  }
  return s;
}

double dbal_score_deterministic(const FinitePosterior& post, std::size_t design,
                                const Eigen::MatrixXd& dist) {
  const auto& cls = *post.model;
  const std::size_t n = cls.n_params();
  const std::size_t K = cls.n_outcomes();
  std::vector<std::size_t> answer(n);
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t best = 0;
    for (std::size_t y = 1; y < K; ++y)
      if (cls.prob(p, design, y) > cls.prob(p, design, best)) best = y;
    if (cls.prob(p, design, best) < 1.0 - 1e-12)
      throw std::invalid_argument(
          "dbal_score_deterministic: class is not deterministic at this design");
    answer[p] = best;
  }
  double best_val = 0.0;
  for (std::size_t y = 0; y < K; ++y) {
    double val = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      if (answer[a] != y) continue;
      for (std::size_t b = 0; b < n; ++b)
        if (answer[b] == y)
          val += post.weights[a] * post.weights[b] * dist(a, b);
    }
    best_val = std::max(best_val, val);
  }
  return best_val;
}

namespace {

struct TripleSet {
  std::vector<Triple> triples;
  std::vector<double> dvals;  // d(theta_i, theta_j) per triple
};

TripleSet make_triple_set(const PosteriorEnsemble& ens, const DistanceFn& dist,
                          int count, RandomStream& rng) {
  TripleSet ts;
  ts.triples = draw_triples(int(ens.size()), count, rng);
  ts.dvals.resize(ts.triples.size());
  for (std::size_t t = 0; t < ts.triples.size(); ++t)
    ts.dvals[t] = dist(ens.samples[ts.triples[t].i], ens.samples[ts.triples[t].j]);
  return ts;
}

// Generic evaluation through virtual dispatch; the reference path.
double eval_candidate_generic(const PosteriorEnsemble& ens,
                              const OutcomeModel& model, const DesignPoint& x,
                              const TripleSet& ts, PdbalPath path,
                              RandomStream& y_rng) {
  const std::size_t m = ens.size();
  std::vector<double> weight(m, 1.0);
  if (!model.constant_entropy())
    for (std::size_t s = 0; s < m; ++s)
      weight[s] = std::exp(2.0 * model.entropy(ens.samples[s], x));
  double acc = 0.0;
  if (path == PdbalPath::ClosedForm) {
    for (std::size_t t = 0; t < ts.triples.size(); ++t) {
      const auto [i, j, k] = ts.triples[t];
      if (ts.dvals[t] == 0.0) continue;
      const double kern =
          *model.triple_kernel(ens.samples[i], ens.samples[j], ens.samples[k], x);
      acc += ts.dvals[t] * kern * weight[k];
    }
  } else {
    std::vector<Outcome> ys(m);
    for (std::size_t s = 0; s < m; ++s)
      ys[s] = model.sample(ens.samples[s], x, y_rng);
    for (std::size_t t = 0; t < ts.triples.size(); ++t) {
      const auto [i, j, k] = ts.triples[t];
      if (ts.dvals[t] == 0.0) continue;
      const double ll = model.log_density(ens.samples[i], x, ys[k]) +
                        model.log_density(ens.samples[j], x, ys[k]);
      acc += ts.dvals[t] * std::exp(ll) * weight[k];
    }
  }
  return acc / double(ts.triples.size());
}

double eval_candidate_logistic(const PosteriorEnsemble& ens,
                               const DesignPoint& x, const TripleSet& ts) {
  const std::size_t m = ens.size();
  std::vector<double> p(m), q(m), w(m);
  for (std::size_t s = 0; s < m; ++s) {
    const double mu = sigmoid(ens.samples[s].dot(x));
    p[s] = mu;
    q[s] = 1.0 - mu;
    w[s] = std::exp(2.0 * binary_entropy(mu));
  }
  double acc = 0.0;
  for (std::size_t t = 0; t < ts.triples.size(); ++t) {
    const auto [i, j, k] = ts.triples[t];
    acc += ts.dvals[t] * (p[i] * p[j] * p[k] + q[i] * q[j] * q[k]) * w[k];
  }
  return acc / double(ts.triples.size());
}

double eval_candidate_gaussian(const PosteriorEnsemble& ens,
                               const DesignPoint& x, double noise_var,
                               const TripleSet& ts) {
  const std::size_t m = ens.size();
  std::vector<double> mu(m);
  for (std::size_t s = 0; s < m; ++s) mu[s] = ens.samples[s].dot(x);
  // Equal variances: alpha = 3 v^2, prefactor 1/(2 pi v sqrt(3)), exponent
  // -(sum of the three squared mean gaps) / (6 v).
  const double pref = 1.0 / (2.0 * M_PI * noise_var * std::sqrt(3.0));
  const double inv6v = 1.0 / (6.0 * noise_var);
  double acc = 0.0;
  for (std::size_t t = 0; t < ts.triples.size(); ++t) {
    const auto [i, j, k] = ts.triples[t];
    const double dij = mu[i] - mu[j];
    const double djk = mu[j] - mu[k];
    const double dik = mu[i] - mu[k];
    acc += ts.dvals[t] *
           std::exp(-(dij * dij + djk * djk + dik * dik) * inv6v);
  }
  return pref * acc / double(ts.triples.size());
}

double eval_candidate_tabular(const PosteriorEnsemble& ens,
                              const TabularModel& model, const DesignPoint& x,
                              const TripleSet& ts) {
  const auto& cls = model.model_class();
  const std::size_t m = ens.size();
  const std::size_t K = cls.n_outcomes();
  const std::size_t design = TabularModel::design_of(x);
  std::vector<const double*> row(m);
  std::vector<double> w(m);
  for (std::size_t s = 0; s < m; ++s) {
    const std::size_t p = TabularModel::param_of(ens.samples[s]);
    row[s] = &cls.probs[(p * cls.n_designs + design) * K];
    w[s] = std::exp(2.0 * cls.row_entropy(p, design));
  }
  double acc = 0.0;
  for (std::size_t t = 0; t < ts.triples.size(); ++t) {
    const auto [i, j, k] = ts.triples[t];
    double kern = 0.0;
    for (std::size_t y = 0; y < K; ++y) kern += row[i][y] * row[j][y] * row[k][y];
    acc += ts.dvals[t] * kern * w[k];
  }
  return acc / double(ts.triples.size());
}

double eval_candidate(const PosteriorEnsemble& ens, const OutcomeModel& model,
                      const DesignPoint& x, const TripleSet& ts, PdbalPath path,
                      RandomStream& y_rng) {
  if (path == PdbalPath::ClosedForm) {
    if (const auto* glm = dynamic_cast<const GlmModel*>(&model)) {
      if (glm->family().kind == FamilyKind::Logistic)
        return eval_candidate_logistic(ens, x, ts);
      if (glm->family().kind == FamilyKind::LinearGaussian)
        return eval_candidate_gaussian(ens, x, glm->family().noise_var, ts);
    }
    if (const auto* tab = dynamic_cast<const TabularModel*>(&model))
      return eval_candidate_tabular(ens, *tab, x, ts);
  }
  return eval_candidate_generic(ens, model, x, ts, path, y_rng);
}

PdbalPath decide_path(const OutcomeModel& model, const AcquisitionConfig& cfg) {
  return (model.has_closed_triple_kernel() && !cfg.force_sampled_y)
             ? PdbalPath::ClosedForm
             : PdbalPath::SampledY;
}

constexpr std::uint64_t kTagTriples = 0x7472u;
constexpr std::uint64_t kTagSampledY = 0x7973u;
constexpr std::uint64_t kTagSelect = 0x73656cu;

std::uint64_t candidate_key(const DesignPoint& x, std::size_t index,
                            bool hash_substreams) {
  if (!hash_substreams) return index;
  return fnv1a(x.data(), sizeof(double) * std::size_t(x.size()));
}

}  // namespace

double pdbal_score_mc(const PosteriorEnsemble& ens, const OutcomeModel& model,
                      const DesignPoint& x, const DistanceFn& dist,
                      const AcquisitionConfig& cfg, RandomStream& rng,
                      PdbalPath* path_out) {
  require(ens.size() >= 3, "pdbal_score_mc: ensemble must have >= 3 samples");
  const TripleSet ts = make_triple_set(ens, dist, cfg.n_mc, rng);
  const PdbalPath path = decide_path(model, cfg);
  if (path_out) *path_out = path;
  return eval_candidate(ens, model, x, ts, path, rng);
}

double eig_score_gaussian_exact(const GaussianPosterior& post, double noise_var,
                                const DesignPoint& x) {
  return 0.5 * std::log1p(x.dot(post.covariance * x) / noise_var);
}

namespace {

double eig_glm(const PosteriorEnsemble& ens, const GlmModel& glm,
               const DesignPoint& x, const AcquisitionConfig& cfg) {
  const auto& family = glm.family();
  const std::size_t m = ens.size();
  std::vector<double> eta(m);
  for (std::size_t s = 0; s < m; ++s) eta[s] = ens.samples[s].dot(x);

  switch (family.kind) {
    case FamilyKind::Logistic: {
      double mean_mu = 0.0, mean_h = 0.0;
      for (double e : eta) {
        const double mu = sigmoid(e);
        mean_mu += mu;
        mean_h += binary_entropy(mu);
      }
      mean_mu /= double(m);
      mean_h /= double(m);
      return binary_entropy(mean_mu) - mean_h;
    }
    case FamilyKind::LinearGaussian: {
      const double v = family.noise_var;
      double mu_bar = 0.0;
      for (double e : eta) mu_bar += e;
      mu_bar /= double(m);
      double var_mu = 0.0;
      for (double e : eta) var_mu += (e - mu_bar) * (e - mu_bar);
      var_mu /= double(m);
      const double sd_pred = std::sqrt(v + var_mu);
      const double lo = std::min(mu_bar - 8.0 * sd_pred,
                                 *std::min_element(eta.begin(), eta.end()) -
                                     8.0 * std::sqrt(v));
      const double hi = std::max(mu_bar + 8.0 * sd_pred,
                                 *std::max_element(eta.begin(), eta.end()) +
                                     8.0 * std::sqrt(v));
      const double norm = 1.0 / std::sqrt(2.0 * M_PI * v);
      auto mixture = [&](double y) {
        double f = 0.0;
        for (double e : eta) {
          const double r = y - e;
          f += std::exp(-0.5 * r * r / v);
        }
        return f * norm / double(m);
      };
      const double h_pred = integrate_adaptive(
          [&](double y) { return -xlogx(mixture(y)); }, lo, hi, 1e-10, 1e-13,
          40, cfg.eig_nodes >= 5 ? 15 : 5);
      return h_pred - 0.5 * std::log(2.0 * M_PI * M_E * v);
    }
    case FamilyKind::Poisson: {
      std::vector<double> lambda(m), logp(m);
      double max_lambda = 0.0, mean_h = 0.0;
      for (std::size_t s = 0; s < m; ++s) {
        lambda[s] = std::exp(eta[s]);
        logp[s] = -lambda[s];  // k = 0
        max_lambda = std::max(max_lambda, lambda[s]);
        mean_h += poisson_entropy(lambda[s]);
      }
      mean_h /= double(m);
      double h_pred = 0.0, cum = 0.0;
      const long long cap =
          200 + 4 * static_cast<long long>(max_lambda +
                                           40.0 * std::sqrt(max_lambda));
      for (long long k = 0; k <= cap; ++k) {
        if (k > 0)
          for (std::size_t s = 0; s < m; ++s)
            logp[s] += std::log(lambda[s]) - std::log(double(k));
        double pk = 0.0;
        for (std::size_t s = 0; s < m; ++s) pk += std::exp(logp[s]);
        pk /= double(m);
        h_pred -= xlogx(pk);
        cum += pk;
        if (k > static_cast<long long>(max_lambda) && 1.0 - cum < 1e-12) break;
        if (k == cap)
          throw std::runtime_error("eig_score: Poisson mixture truncation cap");
      }
      return h_pred - mean_h;
    }
    case FamilyKind::BetaMean: {
      const double phi = family.precision;
      std::vector<double> a(m), b(m), lnB(m);
      double mean_h = 0.0, min_ab = phi;
      for (std::size_t s = 0; s < m; ++s) {
        const double mu = sigmoid(eta[s]);
        a[s] = phi * mu;
        b[s] = phi * (1.0 - mu);
        lnB[s] = log_beta(a[s], b[s]);
        min_ab = std::min(min_ab, std::min(a[s], b[s]));
        mean_h += lnB[s] - (a[s] - 1.0) * digamma(a[s]) -
                  (b[s] - 1.0) * digamma(b[s]) +
                  (a[s] + b[s] - 2.0) * digamma(a[s] + b[s]);
      }
      mean_h /= double(m);
      // Integrate in logit space, y = sigmoid(t): the component log density
      // is -(a-1) softplus(-t) - (b-1) softplus(t) - ln B, stable where
      // sigmoid saturates, and the transformed mass decays exponentially at
      // rate min(a, b), so [-T, T] captures it.
      const double T = std::max(30.0, 45.0 / std::max(min_ab, 1e-3));
      std::vector<double> logf(m);
      auto integrand = [&](double t) {
        double lmax = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < m; ++s) {
          logf[s] = -(a[s] - 1.0) * softplus(-t) - (b[s] - 1.0) * softplus(t) -
                    lnB[s];
          lmax = std::max(lmax, logf[s]);
        }
        if (!std::isfinite(lmax)) return 0.0;
        double acc = 0.0;
        for (std::size_t s = 0; s < m; ++s) acc += std::exp(logf[s] - lmax);
        const double log_mix = lmax + std::log(acc / double(m));
        const double log_jac = -softplus(-t) - softplus(t);
        const double value = std::exp(log_mix + log_jac);
        return value > 0.0 ? -value * log_mix : 0.0;
      };
      const double h_pred = integrate_adaptive(integrand, -T, T, 1e-10, 1e-13,
                                               40, std::max(cfg.eig_nodes, 5));
      return h_pred - mean_h;
    }
  }
  return 0.0;
}

double eig_tabular(const PosteriorEnsemble& ens, const TabularModel& model,
                   const DesignPoint& x) {
  const auto& cls = model.model_class();
  const std::size_t design = TabularModel::design_of(x);
  const std::size_t K = cls.n_outcomes();
  std::vector<double> mix(K, 0.0);
  double mean_h = 0.0;
  for (const auto& theta : ens.samples) {
    const std::size_t p = TabularModel::param_of(theta);
    for (std::size_t y = 0; y < K; ++y) mix[y] += cls.prob(p, design, y);
    mean_h += cls.row_entropy(p, design);
  }
  const double m = double(ens.size());
  double h_pred = 0.0;
  for (std::size_t y = 0; y < K; ++y) h_pred -= xlogx(mix[y] / m);
  return h_pred - mean_h / m;
}

}  // namespace

double eig_score(const PosteriorEnsemble& ens, const OutcomeModel& model,
                 const DesignPoint& x, const AcquisitionConfig& cfg) {
  require(!ens.samples.empty(), "eig_score: empty ensemble");
  if (const auto* glm = dynamic_cast<const GlmModel*>(&model))
    return eig_glm(ens, *glm, x, cfg);
  if (const auto* tab = dynamic_cast<const TabularModel*>(&model))
    return eig_tabular(ens, *tab, x);
  throw std::invalid_argument("eig_score: unsupported model type");
}

double variance_score(const PosteriorEnsemble& ens, const OutcomeModel& model,
                      const DesignPoint& x) {
  require(ens.size() >= 1, "variance_score: empty ensemble");
  const double m = double(ens.size());
  double mean_var = 0.0, mean_mu = 0.0, mean_mu2 = 0.0;
  for (const auto& theta : ens.samples) {
    const Moments mom = model.moments(theta, x);
    mean_var += mom.variance;
    mean_mu += mom.mean;
    mean_mu2 += mom.mean * mom.mean;
  }
  mean_var /= m;
  mean_mu /= m;
  mean_mu2 /= m;
  return mean_var + (mean_mu2 - mean_mu * mean_mu);
}

int select_query(std::span<const double> scores, Strategy strategy,
                 RandomStream& rng) {
  require(!scores.empty(), "select_query: empty score list");
  if (strategy == Strategy::Random)
    return int(rng.uniform_int(scores.size()));
  int best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (strategy == Strategy::PDBAL ? scores[i] < scores[best]
                                    : scores[i] > scores[best])
      best = int(i);
  }
  return best;
}

namespace {

ScoreReport score_pool_impl(const std::vector<DesignPoint>& pool,
                            const PosteriorEnsemble& ens,
                            const OutcomeModel& model, const DistanceFn& dist,
                            const AcquisitionConfig& cfg,
                            const RandomStream& rng, bool hash_substreams,
                            bool parallel, bool generic_only) {
  require(!pool.empty(), "score_pool: empty candidate pool");
  ScoreReport report;
  report.scores.assign(pool.size(), 0.0);

  if (cfg.strategy == Strategy::PDBAL) {
    RandomStream triple_rng = rng.child(kTagTriples);
    const TripleSet ts = make_triple_set(ens, dist, cfg.n_mc, triple_rng);
    const PdbalPath path = decide_path(model, cfg);
    report.pdbal_path = path;
    std::vector<std::uint64_t> consumed(pool.size(), 0);
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t c = 0; c < std::ptrdiff_t(pool.size()); ++c) {
      RandomStream y_rng = rng.child(
          kTagSampledY, candidate_key(pool[c], std::size_t(c), hash_substreams));
      report.scores[c] =
          generic_only
              ? eval_candidate_generic(ens, model, pool[c], ts, path, y_rng)
              : eval_candidate(ens, model, pool[c], ts, path, y_rng);
      consumed[c] = y_rng.draws_consumed();
    }
    report.rng_draws_consumed = triple_rng.draws_consumed();
    for (auto v : consumed) report.rng_draws_consumed += v;
  } else if (cfg.strategy == Strategy::Variance) {
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t c = 0; c < std::ptrdiff_t(pool.size()); ++c)
      report.scores[c] = variance_score(ens, model, pool[c]);
  } else if (cfg.strategy == Strategy::EIG) {
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
    for (std::ptrdiff_t c = 0; c < std::ptrdiff_t(pool.size()); ++c)
      report.scores[c] = eig_score(ens, model, pool[c], cfg);
  }
  // Random: scores stay zero; selection below draws uniformly.

  RandomStream select_rng = rng.child(kTagSelect);
  report.chosen_index = select_query(report.scores, cfg.strategy, select_rng);
  report.rng_draws_consumed += select_rng.draws_consumed();
  return report;
}

}  // namespace

ScoreReport score_pool(const std::vector<DesignPoint>& pool,
                       const PosteriorEnsemble& ens, const OutcomeModel& model,
                       const DistanceFn& dist, const AcquisitionConfig& cfg,
                       const RandomStream& rng, bool hash_substreams) {
  return score_pool_impl(pool, ens, model, dist, cfg, rng, hash_substreams,
                         /*parallel=*/true, /*generic_only=*/false);
}

ScoreReport score_pool_serial(const std::vector<DesignPoint>& pool,
                              const PosteriorEnsemble& ens,
                              const OutcomeModel& model, const DistanceFn& dist,
                              const AcquisitionConfig& cfg,
                              const RandomStream& rng, bool hash_substreams) {
  return score_pool_impl(pool, ens, model, dist, cfg, rng, hash_substreams,
                         /*parallel=*/false, /*generic_only=*/true);
}

}  // namespace pdbal
