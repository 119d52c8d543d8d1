// Compares the OpenMP pool-scoring kernels against the serial generic
// reference: throughput for each strategy, and a consistency check that both
// implementations agree.

#include <chrono>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pdbal/acquisition.hpp"
#include "pdbal/bench.hpp"

using namespace pdbal;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(
             clock::now().time_since_epoch())
      .count();
}

struct Timing {
  double omp_ms = 0.0;
  double serial_ms = 0.0;
  double max_rel_diff = 0.0;
  int chosen_omp = -1;
  int chosen_serial = -1;
};

Timing run_case(Strategy strategy, const LikelihoodFamily& family, int m,
                int pool_size, int n_mc) {
  const int d = 10;
  RandomStream rng(20240901u);
  const GaussianPosterior prior{Eigen::VectorXd::Zero(d),
                                Eigen::MatrixXd::Identity(d, d)};
  RandomStream fit_rng = rng.child(1);
  const PosteriorEnsemble ens = sample_gaussian_posterior(prior, m, fit_rng);

  RandomStream pool_rng = rng.child(2);
  std::vector<DesignPoint> pool;
  pool.reserve(pool_size);
  for (int i = 0; i < pool_size; ++i)
    pool.push_back(gen_covariate(d, 0.1, pool_rng));

  const GlmModel model(family);
  const DistanceFn dist = make_distance_fn(DistanceSpec::first());
  AcquisitionConfig cfg;
  cfg.strategy = strategy;
  cfg.n_mc = n_mc;

  const RandomStream score_rng = rng.child(3);

  Timing t;
  double t0 = now_ms();
  const ScoreReport fast = score_pool(pool, ens, model, dist, cfg, score_rng);
  t.omp_ms = now_ms() - t0;

  t0 = now_ms();
  const ScoreReport ref =
      score_pool_serial(pool, ens, model, dist, cfg, score_rng);
  t.serial_ms = now_ms() - t0;

  for (std::size_t i = 0; i < fast.scores.size(); ++i) {
    const double denom = std::max(std::abs(ref.scores[i]), 1e-300);
    t.max_rel_diff = std::max(
        t.max_rel_diff, std::abs(fast.scores[i] - ref.scores[i]) / denom);
  }
  t.chosen_omp = fast.chosen_index;
  t.chosen_serial = ref.chosen_index;
  return t;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP: disabled\n");
#endif
  std::printf("%-28s %10s %10s %9s %12s\n", "case", "omp_ms", "serial_ms",
              "speedup", "max_rel_diff");

  struct Case {
    const char* name;
    Strategy strategy;
    LikelihoodFamily family;
    int n_mc;
  };
  const Case cases[] = {
      {"pdbal/logistic", Strategy::PDBAL, LikelihoodFamily::logistic(), 10000},
      {"pdbal/linear_gaussian", Strategy::PDBAL,
       LikelihoodFamily::linear_gaussian(0.0625), 10000},
      {"pdbal/poisson(sampled-y)", Strategy::PDBAL, LikelihoodFamily::poisson(),
       2000},
      {"variance/logistic", Strategy::Variance, LikelihoodFamily::logistic(), 0},
      {"eig/logistic", Strategy::EIG, LikelihoodFamily::logistic(), 0},
  };

  bool consistent = true;
  for (const auto& c : cases) {
    const Timing t = run_case(c.strategy, c.family, 300, 2000, c.n_mc);
    std::printf("%-28s %10.1f %10.1f %8.2fx %12.3e\n", c.name, t.omp_ms,
                t.serial_ms, t.serial_ms / std::max(t.omp_ms, 1e-9),
                t.max_rel_diff);
    if (t.max_rel_diff > 1e-10 || t.chosen_omp != t.chosen_serial)
      consistent = false;
  }
  std::printf("consistency: %s\n", consistent ? "ok" : "MISMATCH");
  return consistent ? 0 : 1;
}
