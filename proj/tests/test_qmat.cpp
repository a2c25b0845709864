#include "qat/qmat.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace qat;
using qat::testing::max_entry;
using qat::testing::random_psd;

namespace {

HermitianOp diag(std::initializer_list<double> d) {
  HermitianOp m = HermitianOp::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  Index i = 0;
  for (double v : d) m(i, i) = v, ++i;
  return m;
}

HermitianOp phi_plus() {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return projector(v);
}

}  // namespace

TEST_CASE("is_psd examples") {
  CHECK(is_psd(identity(2), 0.0));
  CHECK_FALSE(is_psd(diag({1, -0.01}), 1e-9));
  CHECK(is_psd(diag({1, -0.01}), 0.02));
  CHECK_THROWS_AS(is_psd(diag({1, 1}), -1.0), std::invalid_argument);
  HermitianOp bad(2, 2);
  bad << 1, 1, 0, 1;
  CHECK_THROWS(is_psd(bad, 0.0));
}

TEST_CASE("is_psd agrees with the characteristic polynomial for qubits") {
  Rng rng(7);
  std::normal_distribution<double> g;
  for (int k = 0; k < 500; ++k) {
    HermitianOp m(2, 2);
    const double a = g(rng), d = g(rng);
    const std::complex<double> b(g(rng), g(rng));
    m << a, b, std::conj(b), d;
    // Roots of t^2 - (a + d) t + (ad - |b|^2).
    const double tr = a + d, det = a * d - std::norm(b);
    const double lmin = 0.5 * (tr - std::sqrt(tr * tr - 4 * det));
    CHECK(is_psd(m, 1e-12) == (lmin >= -1e-12));
  }
}

TEST_CASE("sqrt_fidelity examples") {
  Rng rng(1);
  const HermitianOp r = random_psd(2, rng, 0.3);
  CHECK(sqrt_fidelity(r, r) == doctest::Approx(trace_real(r)).epsilon(1e-12));
  CHECK(sqrt_fidelity(diag({1, 0}), diag({0, 1})) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sqrt_fidelity(diag({0.5, 0.5}), diag({0.5, 0.5})) == doctest::Approx(1.0));
  CHECK(sqrt_fidelity(diag({0.2, 0.3}), diag({0.6, 0.1})) ==
        doctest::Approx(std::sqrt(0.12) + std::sqrt(0.03)).epsilon(1e-12));
}

TEST_CASE("sqrt_fidelity rejects negative operands and clamps noise") {
  CHECK_THROWS(sqrt_fidelity(diag({1, -1e-3}), diag({1, 0})));
  CHECK(sqrt_fidelity(diag({1, -1e-11}), diag({1, 0})) == doctest::Approx(1.0));
}

TEST_CASE("sqrt_fidelity symmetry and Cauchy-Schwarz on random pairs") {
  Rng rng(2024);
  for (int k = 0; k < 1000; ++k) {
    const Index d = 2 + k % 3;
    const HermitianOp s = random_psd(d, rng, 0.1), x = random_psd(d, rng, 0.1);
    const double f = sqrt_fidelity(s, x);
    CHECK(std::abs(f - sqrt_fidelity(x, s)) <= 1e-9);
    CHECK(f * f <= trace_real(s) * trace_real(x) * (1 + 1e-12));
  }
}

TEST_CASE("partial_trace_A examples") {
  CHECK(max_entry(partial_trace_A(phi_plus(), 2, 2) - 0.5 * identity(2)) < 1e-15);
  CHECK(max_entry(partial_trace_A(HermitianOp(identity(4) / 4.0), 2, 2) - 0.5 * identity(2)) < 1e-15);
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    const HermitianOp a = random_psd(2, rng), b = random_psd(3, rng);
    CHECK(max_entry(partial_trace_A(kron(a, b), 2, 3) - trace_real(a) * b) < 1e-12);
    CHECK(max_entry(partial_trace_B(kron(a, b), 2, 3) - trace_real(b) * a) < 1e-12);
  }
  CHECK_THROWS(partial_trace_A(identity(4), 3, 2));
}

TEST_CASE("kron examples") {
  CHECK(max_entry(kron(identity(2), identity(2)) - identity(4)) == 0.0);
  CHECK(max_entry(kron(pauli_z(), identity(2)) - diag({1, 1, -1, -1})) == 0.0);
  Rng rng(4);
  const HermitianOp a = random_psd(2, rng), b = random_psd(3, rng);
  CHECK(trace_real(kron(a, b)) == doctest::Approx(trace_real(a) * trace_real(b)).epsilon(1e-12));
}

TEST_CASE("sqrtm_psd squares back") {
  Rng rng(5);
  const HermitianOp a = random_psd(3, rng);
  const HermitianOp r = sqrtm_psd(a);
  CHECK(max_entry(r * r - a) < 1e-10);
}

TEST_CASE("hermitian bases are orthonormal and span") {
  for (Index d : {2, 3}) {
    const auto full = hermitian_basis(d);
    const auto tl = traceless_basis(d);
    CHECK(full.size() == static_cast<std::size_t>(d * d));
    CHECK(tl.size() == static_cast<std::size_t>(d * d - 1));
    for (std::size_t i = 0; i < full.size(); ++i)
      for (std::size_t j = 0; j < full.size(); ++j)
        CHECK(trace_product(full[i], full[j]) == doctest::Approx(i == j ? 1.0 : 0.0));
    for (const auto& b : tl) CHECK(std::abs(trace_real(b)) < 1e-14);
    Rng rng(6);
    const HermitianOp m = random_psd(d, rng);
    const auto c = coordinates(m, full);
    HermitianOp back = HermitianOp::Zero(d, d);
    for (std::size_t k = 0; k < full.size(); ++k) back += c(static_cast<Index>(k)) * full[k];
    CHECK(max_entry(back - m) < 1e-12);
  }
}
