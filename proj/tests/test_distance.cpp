#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pdbal/distance.hpp"
#include "pdbal/rng.hpp"

using namespace pdbal;

namespace {

ParamVector vec(std::initializer_list<double> v) {
  ParamVector out(Eigen::Index(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ParamVector random_vec(int d, RandomStream& rng) {
  ParamVector v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("d_first") {
  CHECK(d_first(vec({1, 2}), vec({3, -9})) == 0.0);
  CHECK(d_first(vec({1, 0}), vec({-1, 0})) == 1.0);
  CHECK(d_first(vec({0.5, -1}), vec({0.5, -1})) == 0.0);
  // sign(0) counts as positive
  CHECK(d_first(vec({0.0, 1}), vec({2.0, 1})) == 0.0);
  CHECK(d_first(vec({0.0, 1}), vec({-2.0, 1})) == 1.0);
  CHECK_THROWS_AS(d_first(ParamVector(), ParamVector()), std::invalid_argument);
}

TEST_CASE("d_max") {
  CHECK(d_max(vec({3, 1}), vec({-4, 0})) == 0.0);
  CHECK(d_max(vec({1, 2}), vec({2, 1})) == 1.0);
  CHECK(d_max(vec({1, 2}), vec({1, 2})) == 0.0);
  // argmax ties break to the lowest index
  CHECK(d_max(vec({2, 2}), vec({5, 1})) == 0.0);
}

TEST_CASE("d_kendall") {
  CHECK(d_kendall(vec({1, 2, 3}), vec({2, 4, 9})) == doctest::Approx(0.0));
  CHECK(d_kendall(vec({1, 2, 3}), vec({9, 4, 2})) == doctest::Approx(1.0));
  // Hand enumeration over the three pairs: two concordant, one discordant.
  CHECK(d_kendall(vec({1, 2, 3}), vec({1, 3, 2})) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  // Magnitudes matter, not signs.
  CHECK(d_kendall(vec({-1, 2, -3}), vec({1, -2, 3})) == doctest::Approx(0.0));
}

TEST_CASE("kendall tau-b tie handling") {
  // From the tau-b definition: ties in one argument reduce the denominator.
  // x = (1,1,2), y = (1,2,3): pairs (1,2) tied in x; (1,3),(2,3) concordant.
  // tau = 2 / sqrt(3 * 2).
  CHECK(kendall_tau_b(vec({1, 1, 2}), vec({1, 2, 3})) ==
        doctest::Approx(2.0 / std::sqrt(6.0)).epsilon(1e-14));
  // Identical vectors with ties are perfectly concordant.
  CHECK(kendall_tau_b(vec({1, 1, 2}), vec({1, 1, 2})) == doctest::Approx(1.0));
  // Constant against varying carries no ordering information.
  CHECK(kendall_tau_b(vec({1, 1, 1}), vec({1, 2, 3})) == doctest::Approx(0.0));
  CHECK(kendall_tau_b(vec({1, 1, 1}), vec({2, 2, 2})) == doctest::Approx(1.0));
}

TEST_CASE("d_euclidean_scaled") {
  CHECK(d_euclidean_scaled(vec({1, 1}), vec({1, 1}), 4.0) == 0.0);
  CHECK(d_euclidean_scaled(vec({0, 0}), vec({2, 0}), 4.0) ==
        doctest::Approx(0.5));
  CHECK(d_euclidean_scaled(vec({0, 0}), vec({10, 0}), 4.0) == 1.0);
  CHECK_THROWS_AS(d_euclidean_scaled(vec({0}), vec({1}), 0.0),
                  std::invalid_argument);
}

TEST_CASE("d_influence") {
  InfluenceSpec spec;
  spec.half_dim = 1;
  spec.reference_sample = {vec({1.0, 0.0}), vec({-2.0, 1.0}), vec({0.5, 3.0})};

  CHECK(d_influence(vec({1, 5}), vec({1, -5}), spec) == 0.0);
  // Restricted coordinates flipped: every reference point flips sign.
  CHECK(d_influence(vec({1, 0}), vec({-1, 0}), spec) == 1.0);
  // Hand enumeration: theta = (1,0) vs theta' = (0,1); restricted inner
  // products of theta' are all zero, so sign(0)=+1 matches reference points
  // with positive restricted product under theta (points 1 and 3).
  CHECK(d_influence(vec({1, 0}), vec({0, 1}), spec) ==
        doctest::Approx(1.0 / 3.0));
}

TEST_CASE("distance axioms on random pairs") {
  RandomStream rng(1234);
  auto influence = std::make_shared<InfluenceSpec>();
  influence->half_dim = 2;
  for (int i = 0; i < 25; ++i)
    influence->reference_sample.push_back(random_vec(4, rng));

  const std::vector<DistanceSpec> specs = {
      DistanceSpec::first(), DistanceSpec::max(), DistanceSpec::kendall(),
      DistanceSpec::euclidean_scaled(4.0),
      DistanceSpec::make_influence(influence)};

  for (const auto& spec : specs) {
    for (int t = 0; t < 1000; ++t) {
      const ParamVector a = random_vec(4, rng);
      const ParamVector b = random_vec(4, rng);
      const double dab = evaluate(spec, a, b);
      CHECK(evaluate(spec, a, a) == 0.0);            // identity
      CHECK(evaluate(spec, b, a) == doctest::Approx(dab).epsilon(1e-15));
      CHECK(dab >= 0.0);
      CHECK(dab <= 1.0);
    }
  }
}

TEST_CASE("scale invariances") {
  RandomStream rng(77);
  for (int t = 0; t < 200; ++t) {
    const ParamVector a = random_vec(5, rng);
    const ParamVector b = random_vec(5, rng);
    const double c1 = std::exp(rng.uniform(-2.0, 2.0));
    const double c2 = std::exp(rng.uniform(-2.0, 2.0));
    // Kendall distance depends only on the ranks of |.|, so a common positive
    // rescaling changes nothing.
    CHECK(d_kendall(c1 * a, c1 * b) ==
          doctest::Approx(d_kendall(a, b)).epsilon(1e-15));
    // First/max distances are invariant to independent positive scalings.
    CHECK(d_first(c1 * a, c2 * b) == d_first(a, b));
    CHECK(d_max(c1 * a, c2 * b) == d_max(a, b));
  }
}

TEST_CASE("influence distance is a deterministic pure function") {
  RandomStream rng(31);
  auto influence = std::make_shared<InfluenceSpec>();
  influence->half_dim = 2;
  for (int i = 0; i < 50; ++i)
    influence->reference_sample.push_back(random_vec(4, rng));
  const DistanceSpec spec = DistanceSpec::make_influence(influence);
  const ParamVector a = random_vec(4, rng), b = random_vec(4, rng);
  const double first = evaluate(spec, a, b);
  for (int i = 0; i < 10; ++i) CHECK(evaluate(spec, a, b) == first);
}

TEST_CASE("table distance for finite-class embeddings") {
  Eigen::MatrixXd table(2, 2);
  table << 0.0, 0.7, 0.7, 0.0;
  const DistanceFn fn = table_distance_fn(table);
  CHECK(fn(vec({0}), vec({1})) == doctest::Approx(0.7));
  CHECK(fn(vec({1}), vec({1})) == 0.0);
}
