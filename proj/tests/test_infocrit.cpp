#include "qat/infocrit.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace qat;

namespace {

CountTensor random_counts(Rng& rng, int max_count = 50) {
  CountTensor c(3, 3, 3, 2);
  std::uniform_int_distribution<int> u(0, max_count);
  for (Index x = 0; x < 3; ++x)
    for (Index a = 0; a < 3; ++a)
      for (Index y = 0; y < 3; ++y)
        for (Index b = 0; b < 2; ++b) c.set(x, a, y, b, u(rng));
  return c;
}

}  // namespace

TEST_CASE("CountTensor bookkeeping") {
  CountTensor c(2, 3, 3, 2);
  CHECK(c.cells() == 36);
  c.set(0, 2, 1, 0, 7);
  c.set(1, 0, 2, 1, 5);
  c.set(0, 2, 1, 0, 4);
  CHECK(c.total() == 9);
  CHECK(c.block_total(0, 1) == 4);
  CHECK(c.setting_total(1) == 5);
  CHECK(c.outcome_total(0, 2) == 4);
  CHECK_THROWS(c.set(0, 0, 0, 0, -1));
  CHECK_THROWS(c.set(2, 0, 0, 0, 1));
  CHECK_THROWS(CountTensor(0, 3, 3, 2));
}

TEST_CASE("log_likelihood examples") {
  // One nonzero cell with probability 0.5: sigma = I/4 pairs with a Z projector to 1/4,
  // so use sigma = diag(0.5, 0) on the + projector for probability 0.5.
  HermitianOp s = HermitianOp::Zero(2, 2);
  s(0, 0) = 0.5;
  HermitianOp t = HermitianOp::Zero(2, 2);
  t(1, 1) = 0.5;
  const Assemblage a({{s, t}});
  const MeasurementSet bob({{projector(Eigen::Vector2cd(1, 0)), projector(Eigen::Vector2cd(0, 1))}});
  CountTensor c(1, 2, 1, 2);
  c.set(0, 0, 0, 0, 10);
  CHECK(log_likelihood(c, a, bob) == doctest::Approx(10 * std::log(0.5)).epsilon(1e-12));
  CHECK(log_likelihood(CountTensor(1, 2, 1, 2), a, bob) == 0.0);

  // Positive count on a zero-probability cell.
  c.set(0, 0, 0, 1, 1);
  CHECK(std::isinf(log_likelihood(c, a, bob)));
  CHECK(log_likelihood(c, a, bob) < 0);

  CHECK_THROWS(log_likelihood(CountTensor(2, 2, 1, 2), a, bob));
}

TEST_CASE("empirical frequencies dominate every NS assemblage") {
  Rng rng(31);
  const auto bob = pauli_measurements();
  for (int k = 0; k < 50; ++k) {
    const CountTensor c = random_counts(rng);
    const Assemblage a = qat::testing::random_observed_assemblage(rng);
    CHECK(log_likelihood(c, a, bob) <= empirical_log_likelihood(c) + 1e-9);
  }
}

TEST_CASE("log_likelihood is concave on random triples") {
  Rng rng(32);
  const auto bob = pauli_measurements();
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int k = 0; k < 200; ++k) {
    const CountTensor c = random_counts(rng);
    const Assemblage a = qat::testing::random_observed_assemblage(rng);
    const Assemblage b = qat::testing::random_observed_assemblage(rng);
    const double t = u(rng);
    const double mixed = log_likelihood(c, mix(a, b, t), bob);
    const double chord = t * log_likelihood(c, a, bob) + (1 - t) * log_likelihood(c, b, bob);
    CHECK(mixed >= chord - 1e-9);
  }
}

TEST_CASE("aic examples") {
  CHECK(aic(-6.9315, 2) == doctest::Approx(17.863));
  CHECK(aic(0.0, 1) == 2.0);
  CHECK(aic(-10.0, 5) > aic(-9.0, 5));
}

TEST_CASE("delta_aic examples") {
  const auto d = delta_aic({100, 103, 110});
  CHECK(d == std::vector<double>{0, 3, 10});
  CHECK(delta_aic({5}) == std::vector<double>{0});
  CHECK_THROWS(delta_aic({}));
  CHECK(relative_likelihood(3.0) == doctest::Approx(0.2231).epsilon(1e-3));
  const auto shifted = delta_aic({142.5, 145.5, 152.5});
  for (std::size_t i = 0; i < 3; ++i) CHECK(shifted[i] == doctest::Approx(d[i]));
}

TEST_CASE("aicc examples") {
  CHECK(aicc(17.863, 2, 10) == doctest::Approx(17.863 + 12.0 / 7.0));
  CHECK(aicc(10, 3, 5) == doctest::Approx(34.0));
  CHECK_THROWS_AS(aicc(10, 3, 4), std::domain_error);
  double prev = 1e300;
  for (std::int64_t n : {100, 1000, 10000, 100000, 10000000}) {
    const double gap = aicc(50.0, 33, n) - 50.0;
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 1e-3);
}
