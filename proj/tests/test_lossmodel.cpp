#include "qat/lossmodel.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace qat;
using qat::testing::max_entry;

TEST_CASE("offset examples") {
  CHECK(offset(0.0).plus == 0.0);
  CHECK(offset(0.0).minus == 0.0);
  CHECK(offset(0.2).plus == 0.2);
  CHECK(offset(0.2).minus == 0.0);
  CHECK(offset(-0.3).plus == 0.0);
  CHECK(offset(-0.3).minus == 0.3);
  for (double g : {-0.7, -0.01, 0.0, 0.05, 0.4}) {
    const auto o = offset(g);
    CHECK(o.plus - o.minus == g);
    CHECK(o.plus + o.minus == doctest::Approx(std::abs(g)));
  }
}

TEST_CASE("model names round-trip") {
  for (ModelId m : {ModelId::M0, ModelId::M1, ModelId::M2, ModelId::M3}) CHECK(parse_model(to_string(m)) == m);
  CHECK(parse_model("m3") == ModelId::M3);
  CHECK_THROWS(parse_model("m4"));
}

TEST_CASE("LossParams validity bound") {
  CHECK(LossParams{{0.7, 0.8}, {0.3, -0.2}}.valid());
  CHECK_FALSE(LossParams{{0.7}, {0.31}}.valid());
  CHECK_FALSE(LossParams{{0.0}, {0.0}}.valid());
  CHECK_FALSE(LossParams{{1.1}, {0.0}}.valid());
  CHECK_FALSE(LossParams{{0.5, 0.5}, {0.0}}.valid());
  CHECK_THROWS(LossParams({{0.7}, {0.4}}).validate());
}

TEST_CASE("observed_elements examples") {
  const Assemblage ideal = steer(isotropic_state(0.8), pauli_measurements(), 2, 2);
  const HermitianOp rb = ideal.marginal(0);

  const Assemblage same = observed_elements(ideal, LossParams::lossless(3));
  for (Index x = 0; x < 3; ++x) {
    CHECK(max_entry(same(0, x) - ideal(0, x)) < 1e-15);
    CHECK(max_entry(same(2, x)) < 1e-15);
  }

  const Assemblage flat = observed_elements(ideal, LossParams::uniform(3, 0.7));
  for (Index x = 0; x < 3; ++x) CHECK(max_entry(flat(2, x) - 0.3 * rb) < 1e-15);

  LossParams p = LossParams::uniform(3, 0.7);
  p.gamma[0] = 0.06;
  const Assemblage biased = observed_elements(ideal, p);
  CHECK(trace_real(biased(0, 0)) == doctest::Approx(0.38).epsilon(1e-12));
  CHECK(trace_real(biased(1, 0)) == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(max_entry(biased.marginal(0) - rb) < 1e-12);

  CHECK_THROWS(observed_elements(ideal, LossParams::uniform(3, 0.7, 0.5)));
  CHECK_THROWS(observed_elements(biased, LossParams::uniform(3, 0.7)));
}

TEST_CASE("observed_elements preserves validity for random valid parameters") {
  Rng rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Assemblage ideal = steer(sample_ginibre_state(4, rng), pauli_measurements(), 2, 2);
    LossParams p{std::vector<double>(3), std::vector<double>(3)};
    for (int x = 0; x < 3; ++x) {
      p.eps[x] = 0.01 + 0.99 * u(rng);
      p.gamma[x] = (2 * u(rng) - 1) * (1 - p.eps[x]);
    }
    const Assemblage obs = observed_elements(ideal, p);
    const HermitianOp rb = ideal.marginal(0);
    for (Index x = 0; x < 3; ++x) {
      CHECK(max_entry(obs.marginal(x) - rb) < 1e-12);
      for (Index a = 0; a < 3; ++a) CHECK(is_psd(obs(a, x), 1e-12));
      const auto o = offset(p.gamma[x]);
      const double expect = 1 - p.eps[x] - o.plus * trace_real(ideal(0, x)) - o.minus * trace_real(ideal(1, x));
      CHECK(trace_real(obs(2, x)) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("param_count table") {
  CHECK(param_count(ModelId::M1, 3, 2, 3) == 27);
  CHECK(param_count(ModelId::M2, 3, 2, 3) == 30);
  CHECK(param_count(ModelId::M3, 3, 2, 3) == 33);
  CHECK(param_count(ModelId::M0, 3, 2, 3) == 54);
  for (Index m : {1, 2, 4}) {
    CHECK(param_count(ModelId::M2, m, 2, 3) == param_count(ModelId::M1, m, 2, 3) + m);
    CHECK(param_count(ModelId::M3, m, 2, 3) == param_count(ModelId::M2, m, 2, 3) + m);
  }
  CHECK_THROWS(param_count(ModelId::M0, 2, 2, 3));
}
