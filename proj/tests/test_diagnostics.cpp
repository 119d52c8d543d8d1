#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pdbal/acquisition.hpp"
#include "pdbal/diagnostics.hpp"

using namespace pdbal;

namespace {

std::shared_ptr<FiniteModelClass> noisy_class() {
  auto cls = std::make_shared<FiniteModelClass>();
  cls->params = {"a", "b", "c"};
  cls->outcome_space = {Outcome::category(0), Outcome::category(1)};
  cls->n_designs = 2;
  cls->probs = {
      0.8, 0.2, 0.2, 0.8,  // a
      0.2, 0.8, 0.8, 0.2,  // b
      0.8, 0.2, 0.8, 0.2,  // c
  };
  cls->prior_weights = {0.3, 0.3, 0.4};
  cls->validate();
  return cls;
}

Eigen::MatrixXd dist3() {
  Eigen::MatrixXd d(3, 3);
  d << 0.0, 0.8, 0.3, 0.8, 0.0, 0.5, 0.3, 0.5, 0.0;
  return d;
}

}  // namespace

TEST_CASE("avg_diameter") {
  SUBCASE("finite posteriors") {
    auto cls = noisy_class();
    FinitePosterior post;
    post.model = cls;

    post.weights = {1.0, 0.0, 0.0};
    CHECK(avg_diameter(post, dist3()) == doctest::Approx(0.0));

    post.weights = {0.5, 0.5, 0.0};
    CHECK(avg_diameter(post, dist3()) ==
          doctest::Approx(2.0 * 0.25 * 0.8).epsilon(1e-15));

    RandomStream rng(4);
    post.weights = random_simplex(3, rng);
    double direct = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        direct += post.weights[a] * post.weights[b] * dist3()(a, b);
    CHECK(avg_diameter(post, dist3()) ==
          doctest::Approx(direct).epsilon(1e-15));
  }

  SUBCASE("ensemble U-statistic converges to the finite value") {
    auto cls = noisy_class();
    const auto post = FinitePosterior::prior(cls);
    const double exact = avg_diameter(post, dist3());
    RandomStream rng(10);
    const auto ens = sample_finite_posterior(post, 10000, rng);
    const DistanceFn dist = table_distance_fn(dist3());
    // Conservative binomial-style standard error for the U-statistic.
    const double se = 3.0 / std::sqrt(double(ens.size()));
    CHECK(std::abs(avg_diameter(ens, dist) - exact) < 3.0 * se);
  }
}

TEST_CASE("splitting_value") {
  SUBCASE("identical deterministic answers give rho = 0") {
    auto cls = std::make_shared<FiniteModelClass>();
    cls->params = {"a", "b"};
    cls->outcome_space = {Outcome::category(0), Outcome::category(1)};
    cls->n_designs = 1;
    cls->probs = {1, 0, 1, 0};
    cls->prior_weights = {0.5, 0.5};
    cls->validate();
    Eigen::MatrixXd d(2, 2);
    d << 0, 1, 1, 0;
    const auto report = splitting_value(FinitePosterior::prior(cls), 0, d);
    CHECK(report.rho == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_FALSE(report.clamped);
  }
  SUBCASE("perfect split gives rho = 1") {
    auto cls = std::make_shared<FiniteModelClass>();
    cls->params = {"a", "b"};
    cls->outcome_space = {Outcome::category(0), Outcome::category(1)};
    cls->n_designs = 1;
    cls->probs = {1, 0, 0, 1};
    cls->prior_weights = {0.5, 0.5};
    cls->validate();
    Eigen::MatrixXd d(2, 2);
    d << 0, 1, 1, 0;
    const auto report = splitting_value(FinitePosterior::prior(cls), 0, d);
    CHECK(report.rho == doctest::Approx(1.0));
    CHECK(report.s_value == doctest::Approx(0.0));
  }
  SUBCASE("report invariant ties s, rho, and the diameter together") {
    const auto post = FinitePosterior::prior(noisy_class());
    for (std::size_t design = 0; design < 2; ++design) {
      const auto report = splitting_value(post, design, dist3());
      CHECK(std::abs(report.s_value -
                     (1.0 - report.rho_raw) * report.avg_diam) < 1e-12);
      CHECK(report.s_value ==
            doctest::Approx(pdbal_score_exact(post, design, dist3()))
                .epsilon(1e-15));
    }
  }
}

TEST_CASE("potential_trace") {
  SUBCASE("no queries leaves the unit potential") {
    const auto cls = noisy_class();
    const auto trace = potential_trace(*cls, {}, dist3());
    REQUIRE(trace.size() == 1);
    CHECK(trace[0].w == doctest::Approx(1.0));
    CHECK(trace[0].product == doctest::Approx(trace[0].avg_diam));
  }
  SUBCASE("deterministic classes track surviving prior mass") {
    auto cls = std::make_shared<FiniteModelClass>();
    cls->params = {"a", "b", "c"};
    cls->outcome_space = {Outcome::category(0), Outcome::category(1)};
    cls->n_designs = 1;
    cls->probs = {1, 0, 0, 1, 1, 0};
    cls->prior_weights = {0.2, 0.5, 0.3};
    cls->validate();
    Eigen::MatrixXd d = dist3();
    const auto trace = potential_trace(*cls, {{0, 0}}, d);
    REQUIRE(trace.size() == 2);
    // Surviving version space {a, c} has prior mass 0.5; H = 0.
    CHECK(trace[1].w == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("noisy class matches the hand-computed potential") {
    const auto cls = noisy_class();
    const auto trace = potential_trace(*cls, {{0, 1}, {1, 0}}, dist3());
    REQUIRE(trace.size() == 3);
    // Z_2 = sum_p prior_p P_p(y1=1; x=0) P_p(y2=0; x=1).
    const double z2 = 0.3 * 0.2 * 0.2 + 0.3 * 0.8 * 0.8 + 0.4 * 0.2 * 0.8;
    const double h = -(0.8 * std::log(0.8) + 0.2 * std::log(0.2));
    CHECK(trace[2].w == doctest::Approx(z2 * std::exp(2.0 * h)).epsilon(1e-12));
    CHECK(trace[2].product ==
          doctest::Approx(trace[2].w * trace[2].w * trace[2].avg_diam));
  }
  SUBCASE("rejects classes whose entropy varies across parameters") {
    auto cls = std::make_shared<FiniteModelClass>();
    cls->params = {"a", "b"};
    cls->outcome_space = {Outcome::category(0), Outcome::category(1)};
    cls->n_designs = 1;
    cls->probs = {0.9, 0.1, 0.5, 0.5};
    cls->prior_weights = {0.5, 0.5};
    cls->validate();
    Eigen::MatrixXd d(2, 2);
    d << 0, 1, 1, 0;
    CHECK_THROWS_AS(potential_trace(*cls, {{0, 0}}, d), std::invalid_argument);
  }
  SUBCASE("potential bound from the density and entropy caps") {
    RandomStream rng(31);
    ClassGenOptions opts;
    opts.n_designs = 3;
    for (int trial = 0; trial < 30; ++trial) {
      RandomStream class_rng = rng.child(std::uint64_t(trial));
      const auto cls = random_conforming_class(opts, class_rng);
      const Eigen::MatrixXd d =
          random_distance_table(cls.n_params(), class_rng);
      double c1 = 0.0, log_c2 = 0.0;
      for (std::size_t p = 0; p < cls.n_params(); ++p)
        for (std::size_t x = 0; x < cls.n_designs; ++x) {
          log_c2 = std::max(log_c2, cls.row_entropy(p, x));
          for (std::size_t y = 0; y < cls.n_outcomes(); ++y)
            c1 = std::max(c1, cls.prob(p, x, y));
        }
      std::vector<std::pair<std::size_t, std::size_t>> queries;
      for (int q = 0; q < 4; ++q) {
        const std::size_t design = class_rng.uniform_int(cls.n_designs);
        const std::size_t outcome = class_rng.uniform_int(cls.n_outcomes());
        queries.emplace_back(design, outcome);
      }
      const auto trace = potential_trace(cls, queries, d);
      for (std::size_t t = 0; t < trace.size(); ++t)
        CHECK(trace[t].w <=
              std::pow(c1 * std::exp(log_c2), double(t)) + 1e-12);
    }
  }
}

TEST_CASE("check_potential_contraction") {
  SUBCASE("perfect deterministic split") {
    auto cls = std::make_shared<FiniteModelClass>();
    cls->params = {"a", "b"};
    cls->outcome_space = {Outcome::category(0), Outcome::category(1)};
    cls->n_designs = 1;
    cls->probs = {1, 0, 0, 1};
    cls->prior_weights = {0.5, 0.5};
    cls->validate();
    Eigen::MatrixXd d(2, 2);
    d << 0, 1, 1, 0;
    const auto report = check_potential_contraction(FinitePosterior::prior(cls), 0, d);
    CHECK(report.passed);
  }
  SUBCASE("non-informative design is an exact equality") {
    auto cls = std::make_shared<FiniteModelClass>();
    cls->params = {"a", "b"};
    cls->outcome_space = {Outcome::category(0), Outcome::category(1)};
    cls->n_designs = 1;
    cls->probs = {0.6, 0.4, 0.6, 0.4};
    cls->prior_weights = {0.5, 0.5};
    cls->validate();
    Eigen::MatrixXd d(2, 2);
    d << 0, 1, 1, 0;
    const auto report = check_potential_contraction(FinitePosterior::prior(cls), 0, d);
    CHECK(report.passed);
    CHECK(std::abs(report.margin) < 1e-12);
  }
  SUBCASE("holds on 100 random conforming classes") {
    const auto suite = contraction_suite(321, 100);
    CHECK(suite.checked == 100);
    CHECK(suite.violations == 0);
    CHECK(suite.min_margin >= -1e-12);
  }
}

TEST_CASE("check_combine_split") {
  SUBCASE("non-informative pair is 0 <= 0") {
    auto cls = std::make_shared<FiniteModelClass>();
    cls->params = {"a", "b"};
    cls->outcome_space = {Outcome::category(0), Outcome::category(1)};
    cls->n_designs = 2;
    cls->probs = {1, 0, 1, 0, 1, 0, 1, 0};
    cls->prior_weights = {0.5, 0.5};
    cls->validate();
    Eigen::MatrixXd d(2, 2);
    d << 0, 1, 1, 0;
    const auto report =
        check_combine_split(FinitePosterior::prior(cls), 0, 1, d);
    CHECK(report.passed);
    CHECK(std::abs(report.margin) < 1e-12);  // rho12 = rho1 = rho2 = 0
  }
  SUBCASE("deterministic suite") {
    const auto suite = subadditivity_suite(99, 100, ClassNoise::Deterministic);
    CHECK(suite.checked == 100);
    CHECK(suite.violations == 0);
    CHECK(suite.min_margin >= -1e-12);
  }
  SUBCASE("low-entropy factor-2 suite") {
    const auto suite = subadditivity_suite(131, 100, ClassNoise::LowEntropy);
    CHECK(suite.checked == 100);
    CHECK(suite.violations == 0);
    CHECK(suite.min_margin >= -1e-12);
  }
}

TEST_CASE("random class generators produce conforming classes") {
  RandomStream rng(8);
  ClassGenOptions opts;
  opts.noise = ClassNoise::LowEntropy;
  for (int t = 0; t < 20; ++t) {
    RandomStream class_rng = rng.child(std::uint64_t(t));
    const auto cls = random_conforming_class(opts, class_rng);
    cls.validate();
    for (std::size_t x = 0; x < cls.n_designs; ++x) {
      const double h0 = cls.row_entropy(0, x);
      for (std::size_t p = 1; p < cls.n_params(); ++p)
        CHECK(cls.row_entropy(p, x) == doctest::Approx(h0).epsilon(1e-12));
    }
  }
}

TEST_CASE("kernel oracle suite") {
  const auto reports = kernel_oracle_checks(7, 25);
  REQUIRE(reports.size() == 6);
  for (const auto& r : reports) {
    INFO(r.name);
    CHECK(r.passed);
  }
  // Negative control: a perturbed kernel constant must be caught.
  const auto faulty = kernel_oracle_checks(7, 25, true);
  bool any_failed = false;
  for (const auto& r : faulty) any_failed = any_failed || !r.passed;
  CHECK(any_failed);
}
