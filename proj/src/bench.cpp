#include "pdbal/bench.hpp"

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "pdbal/diagnostics.hpp"

namespace pdbal {

namespace {

constexpr std::uint64_t kTagTruth = 0x74727574u;
constexpr std::uint64_t kTagRef = 0x726566u;
constexpr std::uint64_t kTagFit = 0x666974u;
constexpr std::uint64_t kTagPool = 0x706f6fu;
constexpr std::uint64_t kTagScore = 0x73636fu;
constexpr std::uint64_t kTagObserve = 0x6f6273u;

}  // namespace

DesignPoint gen_unit_sphere(int d, RandomStream& rng) {
  DesignPoint x(d);
  for (;;) {
    for (int i = 0; i < d; ++i) x[i] = rng.normal();
    const double norm = x.norm();
    if (norm > 1e-12) return x / norm;
  }
}

ParamVector gen_ground_truth(int d, RandomStream& rng) {
  require(d >= 1, "gen_ground_truth: d must be >= 1");
  return 2.0 * gen_unit_sphere(d, rng);
}

DesignPoint gen_covariate(int d, double p, RandomStream& rng) {
  require(d >= 1, "gen_covariate: d must be >= 1");
  if (rng.uniform() >= p) return gen_unit_sphere(d, rng);
  // Sparse component: keep each coordinate with probability 1/d.
  std::vector<int> kept;
  kept.reserve(d);
  for (int i = 0; i < d; ++i)
    if (rng.uniform() < 1.0 / double(d)) kept.push_back(i);
  DesignPoint x = DesignPoint::Zero(d);
  if (kept.empty()) return x;
  double norm_sq = 0.0;
  for (int i : kept) {
    x[i] = rng.normal();
    norm_sq += x[i] * x[i];
  }
  const double norm = std::sqrt(norm_sq);
  if (norm <= 1e-12) return DesignPoint::Zero(d);
  for (int i : kept) x[i] /= norm;
  return x;
}

double target_error(const PosteriorEnsemble& ens, const ParamVector& truth,
                    const DistanceFn& dist) {
  require(!ens.samples.empty(), "target_error: empty ensemble");
  double acc = 0.0;
  for (const auto& theta : ens.samples) acc += dist(theta, truth);
  return acc / double(ens.samples.size());
}

DistanceSpec build_distance(const ScenarioConfig& cfg, RandomStream& rng) {
  switch (cfg.distance_kind) {
    case DistanceSpec::Kind::First: return DistanceSpec::first();
    case DistanceSpec::Kind::Max: return DistanceSpec::max();
    case DistanceSpec::Kind::Kendall: return DistanceSpec::kendall();
    case DistanceSpec::Kind::EuclideanScaled:
      return DistanceSpec::euclidean_scaled(cfg.euclid_scale);
    case DistanceSpec::Kind::Influence: {
      auto spec = std::make_shared<InfluenceSpec>();
      spec->half_dim =
          cfg.influence_half_dim > 0 ? cfg.influence_half_dim : cfg.d / 2;
      spec->reference_sample.reserve(cfg.influence_ref_size);
      for (int i = 0; i < cfg.influence_ref_size; ++i)
        spec->reference_sample.push_back(gen_covariate(cfg.d, cfg.mix_p, rng));
      return DistanceSpec::make_influence(std::move(spec));
    }
  }
  return DistanceSpec::first();
}

namespace {

Outcome observe(const LikelihoodFamily& family, const ParamVector& truth,
                const DesignPoint& x, RandomStream& rng) {
  Outcome y = sample_outcome(family, truth, x, rng);
  // Keep simulated viabilities away from the Beta boundary, where the
  // density is undefined.
  if (family.kind == FamilyKind::BetaMean)
    y.value = std::clamp(y.value, 0.005, 0.995);
  return y;
}

PosteriorEnsemble fit_posterior(const ScenarioConfig& cfg, const Dataset& data,
                                RandomStream&& rng) {
  if (cfg.family.kind == FamilyKind::LinearGaussian) {
    const GaussianPosterior post = conjugate_linear_gaussian(
        data, cfg.family.noise_var, cfg.prior_var, cfg.d);
    return sample_gaussian_posterior(post, cfg.m_samples, rng);
  }
  return metropolis_glm_posterior(cfg.family, data, cfg.d, cfg.m_samples,
                                  cfg.mcmc, rng);
}

}  // namespace

std::vector<TrajectoryRecord> run_active_loop(const ScenarioConfig& cfg,
                                              std::uint64_t seed,
                                              const DistanceFn* override_dist) {
  require(cfg.d >= 2, "run_active_loop: d must be >= 2");
  require(cfg.mix_p >= 0.0 && cfg.mix_p <= 1.0,
          "run_active_loop: mix_p must lie in [0,1]");
  require(cfg.pool_size >= 1, "run_active_loop: pool_size must be >= 1");

  const RandomStream root(seed);
  RandomStream truth_rng = root.child(kTagTruth);
  const ParamVector truth = gen_ground_truth(cfg.d, truth_rng);

  DistanceFn dist;
  if (override_dist) {
    dist = *override_dist;
  } else {
    RandomStream ref_rng = root.child(kTagRef);
    dist = make_distance_fn(build_distance(cfg, ref_rng));
  }

  const GlmModel model(cfg.family);
  Dataset data;
  std::vector<TrajectoryRecord> records;
  records.reserve(cfg.n_queries + 1);

  for (int t = 0; t <= cfg.n_queries; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    PosteriorEnsemble ens;
    try {
      ens = fit_posterior(cfg, data, root.child(kTagFit, std::uint64_t(t)));
    } catch (const std::exception& e) {
      throw std::runtime_error("run_active_loop: posterior fit failed at step " +
                               std::to_string(t) + ": " + e.what());
    }

    TrajectoryRecord rec;
    rec.step = t;
    rec.strategy = to_string(cfg.acquisition.strategy);
    rec.seed = seed;
    rec.avg_diam = avg_diameter(ens, dist);
    rec.target_error = target_error(ens, truth, dist);

    if (t < cfg.n_queries) {
      RandomStream pool_rng = root.child(kTagPool, std::uint64_t(t));
      std::vector<DesignPoint> pool;
      pool.reserve(cfg.pool_size);
      for (int i = 0; i < cfg.pool_size; ++i)
        pool.push_back(gen_covariate(cfg.d, cfg.mix_p, pool_rng));

      const ScoreReport report =
          score_pool(pool, ens, model, dist, cfg.acquisition,
                     root.child(kTagScore, std::uint64_t(t)));
      rec.chosen_candidate = report.chosen_index;

      RandomStream obs_rng = root.child(kTagObserve, std::uint64_t(t));
      data.add(pool[report.chosen_index],
               observe(cfg.family, truth, pool[report.chosen_index], obs_rng));
    }

    if (cfg.record_timings) {
      const auto t1 = std::chrono::steady_clock::now();
      rec.wall_ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    records.push_back(std::move(rec));
  }
  return records;
}

const char* const kCsvHeader =
    "scenario,strategy,seed,step,n_labels,avg_diam,target_error,"
    "chosen_candidate,wall_ms";

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void write_csv_header(std::ostream& out) { out << kCsvHeader << "\n"; }

void write_records_csv(std::ostream& out, const std::string& scenario,
                       const std::vector<TrajectoryRecord>& records,
                       bool timings) {
  for (const auto& r : records) {
    out << scenario << ',' << r.strategy << ',' << r.seed << ',' << r.step
        << ',' << r.step << ',' << fmt_double(r.avg_diam) << ','
        << fmt_double(r.target_error) << ',' << r.chosen_candidate << ','
        << fmt_double(timings ? r.wall_ms : 0.0) << '\n';
  }
}

namespace {

// Draws from the unit sphere conditioned on |x_S|^2 >= 1 - alpha, where S is
// the first k coordinates. For x uniform on the sphere, t = |x_{S^c}|^2
// follows Beta((d-k)/2, k/2) independently of the two directions, so the
// condition is t <= alpha: propose t from the normalized t^{(d-k)/2 - 1}
// power law on [0, alpha] (exact inverse-CDF) and accept with the remaining
// (1-t)^{k/2 - 1} factor. Rejection sampling from the unconditioned sphere is
// hopeless here: the constraint probability is astronomically small for
// k << d.
DesignPoint gen_filtered_sphere(int d, int k, double alpha, RandomStream& rng) {
  if (k >= d || alpha >= 1.0) return gen_unit_sphere(d, rng);
  const double half_k = 0.5 * double(k);
  const double accept_norm =
      half_k >= 1.0 ? 1.0 : std::pow(1.0 - alpha, half_k - 1.0);
  double t;
  for (;;) {
    const double u = rng.uniform_pos();
    t = alpha * std::pow(u, 2.0 / double(d - k));
    const double accept = std::pow(1.0 - t, half_k - 1.0) / accept_norm;
    if (rng.uniform() < accept) break;
  }
  DesignPoint x(d);
  x.head(k) = std::sqrt(1.0 - t) * gen_unit_sphere(k, rng);
  x.tail(d - k) = std::sqrt(t) * gen_unit_sphere(d - k, rng);
  return x;
}

}  // namespace

TargetedLsReport targeted_ls_demo(int d, int k, double alpha, int n,
                                  double sigma, RandomStream& rng) {
  require(k >= 1 && k <= d, "targeted_ls_demo: need 1 <= k <= d");
  require(alpha > 0.0 && alpha <= 1.0, "targeted_ls_demo: alpha in (0,1]");
  require(n >= k, "targeted_ls_demo: need n >= k");

  RandomStream beta_rng = rng.child(0xb37au);
  const ParamVector beta = gen_unit_sphere(d, beta_rng);

  auto respond = [&](const DesignPoint& x, RandomStream& noise) {
    return beta.dot(x) + (sigma > 0.0 ? sigma * noise.normal() : 0.0);
  };

  // Restricted estimator on filtered queries.
  RandomStream filt_rng = rng.child(0xf117u);
  RandomStream noise_rng = rng.child(0x0153u);
  Eigen::MatrixXd xs(n, k);
  Eigen::VectorXd ys(n);
  for (int i = 0; i < n; ++i) {
    const DesignPoint x = gen_filtered_sphere(d, k, alpha, filt_rng);
    xs.row(i) = x.head(k);
    ys[i] = respond(x, noise_rng);
  }
  const Eigen::VectorXd beta_s = xs.colPivHouseholderQr().solve(ys);

  // Full (minimum-norm) least squares on unfiltered queries.
  RandomStream full_rng = rng.child(0xf0CCu);
  RandomStream full_noise = rng.child(0x902eU);
  Eigen::MatrixXd xf(n, d);
  Eigen::VectorXd yf(n);
  for (int i = 0; i < n; ++i) {
    const DesignPoint x = gen_unit_sphere(d, full_rng);
    xf.row(i) = x;
    yf[i] = respond(x, full_noise);
  }
  const Eigen::VectorXd beta_full =
      xf.completeOrthogonalDecomposition().solve(yf);

  TargetedLsReport report;
  report.beta_norm_sq = beta.squaredNorm();
  report.restricted_sq_err = (beta_s - beta.head(k)).squaredNorm();
  report.full_sq_err = (beta_full.head(k) - beta.head(k)).squaredNorm();
  return report;
}

}  // namespace pdbal
