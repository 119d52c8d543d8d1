#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "oracles.hpp"
#include "pdbal/posterior.hpp"
#include "pdbal/special.hpp"

using namespace pdbal;

namespace {

ParamVector vec(std::initializer_list<double> v) {
  ParamVector out(Eigen::Index(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Batch-means Monte-Carlo standard error of the mean of a (possibly
// autocorrelated) scalar sequence.
double batch_means_se(const std::vector<double>& xs, int n_batches = 50) {
  const int batch = int(xs.size()) / n_batches;
  std::vector<double> means;
  for (int b = 0; b < n_batches; ++b) {
    double m = 0.0;
    for (int i = 0; i < batch; ++i) m += xs[b * batch + i];
    means.push_back(m / batch);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= n_batches;
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= (n_batches - 1);
  return std::sqrt(var / n_batches);
}

std::vector<double> coordinate_series(const PosteriorEnsemble& ens, int j) {
  std::vector<double> xs;
  xs.reserve(ens.size());
  for (const auto& s : ens.samples) xs.push_back(s[j]);
  return xs;
}

// Independent route to the conjugate posterior mean: coordinate descent on
// the exact quadratic log-posterior.
Eigen::VectorXd maximize_log_posterior(const Dataset& data, double noise_var,
                                       double prior_var, int d) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  for (int sweep = 0; sweep < 500; ++sweep) {
    for (int j = 0; j < d; ++j) {
      double num = 0.0, den = 1.0 / prior_var;
      for (const auto& [x, y] : data.pairs) {
        const double partial = y.value - (x.dot(theta) - x[j] * theta[j]);
        num += x[j] * partial / noise_var;
        den += x[j] * x[j] / noise_var;
      }
      theta[j] = num / den;
    }
  }
  return theta;
}

}  // namespace

TEST_CASE("conjugate posterior: empty dataset equals the prior") {
  const auto post = conjugate_linear_gaussian(Dataset{}, 1.0, 2.5, 4);
  CHECK(post.mean.norm() == doctest::Approx(0.0));
  CHECK((post.covariance - 2.5 * Eigen::MatrixXd::Identity(4, 4)).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("conjugate posterior: rank-one update") {
  Dataset data;
  const double c = 1.8;
  data.add(vec({1, 0, 0}), Outcome::real(c));
  const auto post = conjugate_linear_gaussian(data, 1.0, 1.0, 3);
  CHECK(post.mean[0] == doctest::Approx(c / 2.0).epsilon(1e-12));
  CHECK(post.mean[1] == doctest::Approx(0.0));
  CHECK(post.covariance(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(post.covariance(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(post.covariance(2, 2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("conjugate posterior mean maximizes the exact log-posterior") {
  RandomStream rng(42);
  Dataset data;
  for (int i = 0; i < 20; ++i) {
    ParamVector x(3);
    for (int j = 0; j < 3; ++j) x[j] = rng.normal();
    data.add(x, Outcome::real(rng.normal()));
  }
  const double noise_var = 0.5, prior_var = 1.3;
  const auto post = conjugate_linear_gaussian(data, noise_var, prior_var, 3);
  const Eigen::VectorXd oracle_mode =
      maximize_log_posterior(data, noise_var, prior_var, 3);
  CHECK((post.mean - oracle_mode).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("conjugate covariance is Loewner-nonincreasing in the data") {
  RandomStream rng(8);
  Dataset data;
  Eigen::MatrixXd prev =
      conjugate_linear_gaussian(data, 0.25, 1.0, 4).covariance;
  for (int i = 0; i < 10; ++i) {
    ParamVector x(4);
    for (int j = 0; j < 4; ++j) x[j] = rng.normal();
    data.add(x, Outcome::real(rng.normal()));
    const Eigen::MatrixXd next =
        conjugate_linear_gaussian(data, 0.25, 1.0, 4).covariance;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(prev - next);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    prev = next;
  }
}

TEST_CASE("sample_gaussian_posterior") {
  GaussianPosterior post;
  post.mean = Eigen::VectorXd::Zero(3);
  post.covariance = Eigen::MatrixXd::Identity(3, 3);

  SUBCASE("sample covariance approaches identity") {
    RandomStream rng(5);
    const auto ens = sample_gaussian_posterior(post, 100000, rng);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
    for (const auto& s : ens.samples) mean += s;
    mean /= double(ens.size());
    for (const auto& s : ens.samples)
      cov += (s - mean) * (s - mean).transpose();
    cov /= double(ens.size());
    CHECK((cov - Eigen::MatrixXd::Identity(3, 3)).lpNorm<Eigen::Infinity>() <
          0.05);
  }
  SUBCASE("seeded determinism") {
    RandomStream r1(7), r2(7);
    const auto e1 = sample_gaussian_posterior(post, 50, r1);
    const auto e2 = sample_gaussian_posterior(post, 50, r2);
    for (std::size_t i = 0; i < e1.samples.size(); ++i)
      CHECK(e1.samples[i] == e2.samples[i]);
  }
  SUBCASE("minimal ensemble") {
    RandomStream rng(9);
    const auto ens = sample_gaussian_posterior(post, 3, rng);
    CHECK(ens.size() == 3);
    CHECK(ens.provenance == Provenance::Exact);
    RandomStream rng2(9);
    CHECK_THROWS_AS(sample_gaussian_posterior(post, 2, rng2),
                    std::invalid_argument);
  }
}

TEST_CASE("metropolis matches the conjugate posterior on linear-Gaussian data") {
  RandomStream rng(2024);
  const int d = 4;
  Dataset data;
  for (int i = 0; i < 12; ++i) {
    ParamVector x(d);
    for (int j = 0; j < d; ++j) x[j] = rng.normal();
    data.add(x, Outcome::real(0.5 * x[0] - 0.3 * x[2] + 0.5 * rng.normal()));
  }
  const auto family = LikelihoodFamily::linear_gaussian(0.25);
  const auto exact = conjugate_linear_gaussian(data, 0.25, 1.0, d);

  const int m = 3000;
  const auto ens =
      metropolis_glm_posterior(family, data, d, m, MCMCConfig{}, rng.child(1));
  REQUIRE(int(ens.size()) == m);

  for (int j = 0; j < d; ++j) {
    const auto xs = coordinate_series(ens, j);
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= double(m);
    const double se = batch_means_se(xs);
    CHECK(std::abs(mean - exact.mean[j]) < 5.0 * se);
    double var = 0.0;
    for (double v : xs) var += (v - mean) * (v - mean);
    var /= double(m - 1);
    CHECK(var == doctest::Approx(exact.covariance(j, j)).epsilon(0.10));
  }
}

TEST_CASE("metropolis matches 1-d quadrature for a single logistic observation") {
  Dataset data;
  data.add(vec({1.0}), Outcome::binary(1));
  const auto family = LikelihoodFamily::logistic();

  // Posterior is proportional to phi(t) sigmoid(t).
  auto unnorm = [](double t) {
    return std::exp(-0.5 * t * t) * sigmoid(t);
  };
  const double z = oracle::integrate(unnorm, -10.0, 10.0, 1e-13);
  const double mean_exact =
      oracle::integrate([&](double t) { return t * unnorm(t); }, -10.0, 10.0,
                        1e-13) /
      z;

  RandomStream rng(55);
  const auto ens =
      metropolis_glm_posterior(family, data, 1, 3000, MCMCConfig{}, rng);
  const auto xs = coordinate_series(ens, 0);
  double mean = 0.0;
  for (double v : xs) mean += v;
  mean /= double(xs.size());
  CHECK(std::abs(mean - mean_exact) < 3.0 * batch_means_se(xs));
}

TEST_CASE("metropolis on an empty dataset reproduces the prior") {
  RandomStream rng(66);
  const auto ens = metropolis_glm_posterior(LikelihoodFamily::logistic(),
                                            Dataset{}, 3, 3000, MCMCConfig{},
                                            rng);
  for (int j = 0; j < 3; ++j) {
    const auto xs = coordinate_series(ens, j);
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= double(xs.size());
    const double se = batch_means_se(xs);
    CHECK(std::abs(mean) < 5.0 * se);
    double var = 0.0;
    for (double v : xs) var += (v - mean) * (v - mean);
    var /= double(xs.size() - 1);
    CHECK(var == doctest::Approx(1.0).epsilon(0.15));
  }
}

TEST_CASE("metropolis determinism and acceptance-rate health") {
  RandomStream rng(77);
  Dataset data;
  RandomStream gen = rng.child(9);
  for (int i = 0; i < 15; ++i) {
    ParamVector x(5);
    for (int j = 0; j < 5; ++j) x[j] = gen.normal();
    data.add(x, Outcome::binary(gen.bernoulli(sigmoid(x[0] - x[3])) ? 1 : 0));
  }
  const auto family = LikelihoodFamily::logistic();
  const auto e1 =
      metropolis_glm_posterior(family, data, 5, 300, MCMCConfig{}, rng);
  const auto e2 =
      metropolis_glm_posterior(family, data, 5, 300, MCMCConfig{}, rng);
  REQUIRE(e1.size() == e2.size());
  for (std::size_t i = 0; i < e1.size(); ++i)
    CHECK(e1.samples[i] == e2.samples[i]);  // bitwise determinism
  CHECK(e1.provenance == Provenance::Mcmc);
  CHECK(e1.mcmc_acceptance >= 0.1);
  CHECK(e1.mcmc_acceptance <= 0.5);
}

TEST_CASE("finite posterior updates") {
  auto cls = std::make_shared<FiniteModelClass>();
  cls->params = {"a", "b", "c"};
  cls->outcome_space = {Outcome::category(0), Outcome::category(1)};
  cls->n_designs = 2;
  // design 0: informative; design 1: identical likelihood across params
  cls->probs = {
      // param a: design 0, design 1
      0.9, 0.1, 0.5, 0.5,
      // param b
      0.4, 0.6, 0.5, 0.5,
      // param c
      0.2, 0.8, 0.5, 0.5,
  };
  cls->prior_weights = {0.5, 0.25, 0.25};
  cls->validate();
  const auto post = FinitePosterior::prior(cls);

  SUBCASE("uninformative outcome leaves weights unchanged") {
    const auto updated = finite_posterior_update(post, 1, 0);
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(updated.posterior.weights[i] ==
            doctest::Approx(post.weights[i]).epsilon(1e-15));
    CHECK(updated.z_ratio == doctest::Approx(0.5));
  }
  SUBCASE("hand-computed Bayes update") {
    const auto updated = finite_posterior_update(post, 0, 0);
    const double z = 0.5 * 0.9 + 0.25 * 0.4 + 0.25 * 0.2;
    CHECK(updated.z_ratio == doctest::Approx(z).epsilon(1e-15));
    CHECK(updated.posterior.weights[0] ==
          doctest::Approx(0.45 / z).epsilon(1e-14));
    CHECK(updated.posterior.weights[1] ==
          doctest::Approx(0.10 / z).epsilon(1e-14));
    CHECK(updated.posterior.weights[2] ==
          doctest::Approx(0.05 / z).epsilon(1e-14));
  }
  SUBCASE("sequential updates equal the batch update") {
    auto seq = finite_posterior_update(post, 0, 1);
    seq = finite_posterior_update(seq.posterior, 0, 0);
    // Batch: w_i prop to prior_i * P_i(y1) * P_i(y2), order-free.
    std::vector<double> batch(3);
    double z = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      batch[i] = post.weights[i] * cls->prob(i, 0, 1) * cls->prob(i, 0, 0);
      z += batch[i];
    }
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(seq.posterior.weights[i] ==
            doctest::Approx(batch[i] / z).epsilon(1e-12));
  }
  SUBCASE("version-space elimination and impossible evidence") {
    auto det = std::make_shared<FiniteModelClass>(*cls);
    det->probs = {1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
    det->validate();
    const auto dpost = FinitePosterior::prior(det);
    CHECK_THROWS_AS(finite_posterior_update(dpost, 0, 1), std::runtime_error);
    auto mixed = std::make_shared<FiniteModelClass>(*cls);
    mixed->probs = {1, 0, 0.5, 0.5, 0, 1, 0.5, 0.5, 1, 0, 0.5, 0.5};
    mixed->validate();
    const auto mpost = FinitePosterior::prior(mixed);
    const auto updated = finite_posterior_update(mpost, 0, 0);
    CHECK(updated.posterior.weights[1] == 0.0);  // inconsistent param dies
  }
}

TEST_CASE("posterior predictive") {
  const auto family = LikelihoodFamily::logistic();
  const auto x = vec({1.0, -1.0});

  SUBCASE("single-sample ensemble equals that model's density") {
    PosteriorEnsemble ens;
    ens.samples = {vec({0.4, 0.2})};
    const Outcome y = Outcome::binary(1);
    CHECK(posterior_predictive(ens, family, x, y) ==
          doctest::Approx(std::exp(log_density(family, ens.samples[0], x, y)))
              .epsilon(1e-15));
  }
  SUBCASE("finite 50/50 posterior averages the two densities") {
    auto cls = std::make_shared<FiniteModelClass>();
    cls->params = {"a", "b"};
    cls->outcome_space = {Outcome::category(0), Outcome::category(1)};
    cls->n_designs = 1;
    cls->probs = {0.3, 0.7, 0.9, 0.1};
    cls->prior_weights = {0.5, 0.5};
    cls->validate();
    const auto post = FinitePosterior::prior(cls);
    CHECK(posterior_predictive(post, 0, 1) == doctest::Approx(0.4));
  }
  SUBCASE("gaussian ensemble approaches the closed-form predictive") {
    RandomStream rng(21);
    const auto gfam = LikelihoodFamily::linear_gaussian(0.5);
    GaussianPosterior post;
    post.mean = vec({0.5, -0.2});
    post.covariance = Eigen::MatrixXd::Identity(2, 2) * 0.4;
    const auto ens = sample_gaussian_posterior(post, 100000, rng);
    const Outcome y = Outcome::real(0.3);
    const double exact = gaussian_predictive_density(post, 0.5, x, y.value);
    // Sample-mean standard error of the averaged densities.
    double mean = 0.0, m2 = 0.0;
    int n = 0;
    for (const auto& theta : ens.samples) {
      const double v = std::exp(log_density(gfam, theta, x, y));
      ++n;
      const double delta = v - mean;
      mean += delta / n;
      m2 += delta * (v - mean);
    }
    const double se = std::sqrt(m2 / double(n - 1) / double(n));
    CHECK(std::abs(mean - exact) < 5.0 * se);
    CHECK(posterior_predictive(ens, gfam, x, y) ==
          doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("metropolis acceptance health across the regression families") {
  RandomStream rng(88);
  const int d = 6;
  RandomStream truth_rng = rng.child(1);
  ParamVector truth(d);
  for (int j = 0; j < d; ++j) truth[j] = truth_rng.normal();
  truth *= 2.0 / truth.norm();

  for (const auto& family :
       {LikelihoodFamily::logistic(), LikelihoodFamily::poisson(),
        LikelihoodFamily::beta_mean(10.0),
        LikelihoodFamily::linear_gaussian(0.0625)}) {
    Dataset data;
    RandomStream gen = rng.child(2, std::uint64_t(family.kind));
    for (int i = 0; i < 12; ++i) {
      ParamVector x(d);
      for (int j = 0; j < d; ++j) x[j] = gen.normal();
      x /= x.norm();
      Outcome y = sample_outcome(family, truth, x, gen);
      if (family.kind == FamilyKind::BetaMean)
        y.value = std::clamp(y.value, 0.005, 0.995);
      data.add(x, y);
    }
    const auto ens = metropolis_glm_posterior(family, data, d, 300,
                                              MCMCConfig{}, rng.child(3));
    INFO(to_string(family.kind));
    CHECK(ens.mcmc_acceptance >= 0.1);
    CHECK(ens.mcmc_acceptance <= 0.5);
  }
}

TEST_CASE("metropolis initialization error surfaces") {
  // A dataset whose zero-start log-posterior is non-finite: Beta outcome at
  // an (invalidly constructed) boundary value.
  Dataset data;
  data.add(vec({1.0}), Outcome{OutcomeTag::UnitInterval, 0.0});
  RandomStream rng(3);
  CHECK_THROWS(metropolis_glm_posterior(LikelihoodFamily::beta_mean(9.0), data,
                                        1, 10, MCMCConfig{}, rng));
}
