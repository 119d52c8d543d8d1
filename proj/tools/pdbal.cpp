#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pdbal/config.hpp"
#include "pdbal/diagnostics.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int log_verbosity() {
  const char* env = std::getenv("PDBAL_LOG");
  if (!env) return 1;
  const std::string v(env);
  if (v == "quiet" || v == "0") return 0;
  if (v == "info" || v == "1") return 1;
  if (v == "debug" || v == "2") return 2;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_verbosity() >= 1) std::cerr << "[pdbal] " << msg << "\n";
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct SimulateArgs {
  std::string config_path;
  std::string out_path;
  std::vector<std::string> overrides;
  std::string strategy;
  int n_mc = -1;
  int eig_nodes = -1;
  std::int64_t seed = -1;  // <0: keep config seeds
  int jobs = 1;
  bool timings = false;
};

int cmd_simulate(const SimulateArgs& args) {
  nlohmann::json doc = pdbal::load_config_document(args.config_path);
  if (!doc.contains("scenario"))
    throw pdbal::ConfigError("config must contain a scenario array");
  for (const auto& kv : args.overrides) pdbal::apply_override(doc, kv);
  if (!args.strategy.empty())
    pdbal::apply_override(doc, "acquisition.strategy=" + args.strategy);
  if (args.n_mc > 0)
    pdbal::apply_override(doc, "acquisition.n_mc=" + std::to_string(args.n_mc));
  if (args.eig_nodes > 0)
    pdbal::apply_override(doc,
                          "acquisition.eig_nodes=" + std::to_string(args.eig_nodes));
  pdbal::RunConfig run = pdbal::parse_run_config(doc);

  std::ofstream out(args.out_path);
  if (!out)
    throw pdbal::ConfigError("cannot open output file: " + args.out_path);
  pdbal::write_csv_header(out);

  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::string first_error;

  for (auto& scenario : run.scenarios) {
    if (args.seed >= 0) scenario.seed = std::uint64_t(args.seed);
    scenario.record_timings = args.timings;
    log_info("scenario " + scenario.name + ": " +
             std::to_string(scenario.n_seeds) + " seed(s), strategy " +
             pdbal::to_string(scenario.acquisition.strategy));

    const int n = scenario.n_seeds;
#pragma omp parallel for ordered schedule(dynamic, 1) \
    num_threads(std::max(1, args.jobs)) if (args.jobs > 1)
    for (int s = 0; s < n; ++s) {
      std::vector<pdbal::TrajectoryRecord> records;
      if (!failed.load()) {
        try {
          records = pdbal::run_active_loop(scenario, scenario.seed + s);
        } catch (const std::exception& e) {
          failed.store(true);
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (first_error.empty()) first_error = e.what();
        }
      }
#pragma omp ordered
      {
        // Flush per completed seed, in seed order.
        pdbal::write_records_csv(out, scenario.name, records, args.timings);
        out.flush();
      }
    }
    if (failed.load()) break;
  }
  if (failed.load()) {
    std::cerr << "pdbal simulate: " << first_error << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

struct ScoreArgs {
  std::string config_path;
  std::string pool_path;
  std::string out_path;
  std::vector<std::string> overrides;
  std::string strategy;
  int n_mc = -1;
  int eig_nodes = -1;
  std::int64_t seed = -1;
  int jobs = 1;
};

std::vector<pdbal::DesignPoint> read_pool_csv(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw pdbal::ConfigError("cannot open pool file: " + path);
  std::vector<pdbal::DesignPoint> pool;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        if (pool.empty() && values.empty()) break;  // header row
        throw pdbal::ConfigError("pool file: cannot parse value '" + cell + "'");
      }
    }
    if (values.empty()) continue;
    if (int(values.size()) != d)
      throw pdbal::ConfigError(
          "pool file: row has " + std::to_string(values.size()) +
          " columns, scenario dimension is " + std::to_string(d));
    pool.push_back(Eigen::Map<Eigen::VectorXd>(values.data(), d));
  }
  if (pool.empty()) throw pdbal::ConfigError("pool file: no candidate rows");
  return pool;
}

int cmd_score(const ScoreArgs& args) {
  nlohmann::json doc = pdbal::load_config_document(args.config_path);
  for (const auto& kv : args.overrides) pdbal::apply_override(doc, kv);
  pdbal::RunConfig run = pdbal::parse_run_config(doc);
  pdbal::ScenarioConfig cfg = run.scenarios.front();
  if (args.seed >= 0) cfg.seed = std::uint64_t(args.seed);
  if (!args.strategy.empty())
    cfg.acquisition.strategy = pdbal::strategy_from_string(args.strategy);
  if (args.n_mc > 0) cfg.acquisition.n_mc = args.n_mc;
  if (args.eig_nodes > 0) cfg.acquisition.eig_nodes = args.eig_nodes;

#ifdef _OPENMP
  omp_set_num_threads(std::max(1, args.jobs));
#endif

  const auto pool = read_pool_csv(args.pool_path, cfg.d);

  // Single-shot scoring happens under the prior: a standard-normal coefficient
  // prior scaled by prior_var, sampled exactly.
  const pdbal::RandomStream root(cfg.seed);
  pdbal::GaussianPosterior prior;
  prior.mean = Eigen::VectorXd::Zero(cfg.d);
  prior.covariance =
      cfg.prior_var * Eigen::MatrixXd::Identity(cfg.d, cfg.d);
  pdbal::RandomStream fit_rng = root.child(0x666974u);
  const pdbal::PosteriorEnsemble ens =
      pdbal::sample_gaussian_posterior(prior, cfg.m_samples, fit_rng);

  pdbal::RandomStream ref_rng = root.child(0x726566u);
  const pdbal::DistanceFn dist =
      pdbal::make_distance_fn(pdbal::build_distance(cfg, ref_rng));
  const pdbal::GlmModel model(cfg.family);

  const pdbal::ScoreReport report =
      pdbal::score_pool(pool, ens, model, dist, cfg.acquisition,
                        root.child(0x73636fu), /*hash_substreams=*/true);

  std::ofstream out(args.out_path);
  if (!out)
    throw pdbal::ConfigError("cannot open output file: " + args.out_path);
  out << "index,score,chosen\n";
  for (std::size_t i = 0; i < report.scores.size(); ++i)
    out << i << ',' << fmt_double(report.scores[i]) << ','
        << (int(i) == report.chosen_index ? 1 : 0) << '\n';
  log_info("scored " + std::to_string(pool.size()) + " candidates, chose " +
           std::to_string(report.chosen_index));
  return kExitOk;
}

int cmd_check(std::uint64_t seed, int n_classes, bool inject_fault) {
  bool all_passed = true;
  auto print = [&](const std::string& name, bool passed, double margin,
                   const std::string& extra) {
    std::cout << name << ' ' << (passed ? "pass" : "FAIL")
              << " margin=" << fmt_double(margin)
              << (extra.empty() ? "" : " " + extra) << "\n";
    all_passed = all_passed && passed;
  };

  for (const auto& r : pdbal::kernel_oracle_checks(seed, 100, inject_fault))
    print(r.name, r.passed, r.margin, "");

  const auto l1 = pdbal::contraction_suite(seed + 1, n_classes);
  print(l1.name, l1.passed(), l1.min_margin,
        "classes=" + std::to_string(l1.checked));

  for (const auto noise :
       {pdbal::ClassNoise::Deterministic, pdbal::ClassNoise::LowEntropy}) {
    const auto l4 = pdbal::subadditivity_suite(seed + 2, n_classes, noise);
    print(l4.name, l4.passed(), l4.min_margin,
          "classes=" + std::to_string(l4.checked) +
              " attempts=" + std::to_string(l4.attempts));
  }
  return all_passed ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Targeted Bayesian active learning toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand(
      "simulate", "Run seeded active-learning scenarios and write a CSV");
  simulate->add_option("--config", sim.config_path, "Scenario config (JSON or TOML)")
      ->required();
  simulate->add_option("--out", sim.out_path, "Output CSV path")->required();
  simulate->add_option("--override", sim.overrides,
                       "key=value override applied to every scenario");
  simulate->add_option("--strategy", sim.strategy, "Acquisition strategy override");
  simulate->add_option("--n-mc", sim.n_mc, "Triple subsample count override");
  simulate->add_option("--eig-nodes", sim.eig_nodes,
                       "EIG quadrature nodes override");
  simulate->add_option("--seed", sim.seed, "Base seed override");
  simulate->add_option("--jobs", sim.jobs, "Concurrent seed workers");
  simulate->add_flag("--timings", sim.timings,
                     "Record wall-clock times (output is then not reproducible)");

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand(
      "score", "Score an external candidate pool under the prior");
  score_cmd->add_option("--config", score.config_path, "Scenario config")
      ->required();
  score_cmd->add_option("--pool", score.pool_path, "CSV of candidate rows")
      ->required();
  score_cmd->add_option("--out", score.out_path, "Output CSV path")->required();
  score_cmd->add_option("--override", score.overrides, "key=value override");
  score_cmd->add_option("--strategy", score.strategy, "Acquisition strategy");
  score_cmd->add_option("--n-mc", score.n_mc, "Triple subsample count");
  score_cmd->add_option("--eig-nodes", score.eig_nodes, "EIG quadrature nodes");
  score_cmd->add_option("--seed", score.seed, "Seed override");
  score_cmd->add_option("--jobs", score.jobs, "Scoring threads");

  std::uint64_t check_seed = 0;
  int check_classes = 500;
  bool inject_fault = false;
  auto* check = app.add_subcommand(
      "check", "Run kernel-oracle and theory-check suites");
  check->add_option("--seed", check_seed, "Suite seed");
  check->add_option("--n-classes", check_classes, "Random classes per suite")
      ->check(CLI::PositiveNumber);
  check->add_flag("--inject-fault", inject_fault,
                  "Perturb a kernel to verify the harness detects violations");

  try {
    app.parse(argc, argv);
    if (*simulate) return cmd_simulate(sim);
    if (*score_cmd) return cmd_score(score);
    return cmd_check(check_seed, check_classes, inject_fault);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;  // --help exits cleanly
  } catch (const pdbal::ConfigError& e) {
    std::cerr << "pdbal: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "pdbal: " << e.what() << "\n";
    return kExitRuntime;
  }
}
