#ifndef QAT_QMAT_HPP
#define QAT_QMAT_HPP

// Small dense complex Hermitian matrix arithmetic.
//
// Everything here is header-only and templated on the real scalar type so the
// same code serves double-precision fits and long-double oracle checks in the
// tests. Matrices are plain Eigen dynamic matrices; "Hermitian" is a contract
// checked at the entry points that care about it.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qat {

template <typename Real>
using HermitianOpT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

using HermitianOp = HermitianOpT<double>;
using Index = Eigen::Index;

/// Default hermiticity tolerance.
inline constexpr double kHermitianTol = 1e-12;
/// Eigenvalues in [-kClampTol, 0] are treated as zero by the square-root helpers.
inline constexpr double kClampTol = 1e-9;

template <typename Derived>
auto max_abs_entry(const Eigen::MatrixBase<Derived>& m) {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  if (m.size() == 0) return Real(0);
  return m.cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol = kHermitianTol) {
  if (m.rows() != m.cols() || m.rows() < 1) return false;
  return max_abs_entry(m - m.adjoint()) <= tol;
}

template <typename Derived>
void require_hermitian(const Eigen::MatrixBase<Derived>& m, const char* what,
                       double tol = kHermitianTol) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
  if (!is_hermitian(m, tol))
    throw std::invalid_argument(std::string(what) + ": matrix is not Hermitian");
}

/// Ascending real eigenvalues of a Hermitian matrix.
template <typename Derived>
auto eigenvalues(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat h = m;
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().eval();
}

template <typename Derived>
auto min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  return eigenvalues(m)(0);
}

/// True iff the smallest eigenvalue is >= -tol.
template <typename Derived>
bool is_psd(const Eigen::MatrixBase<Derived>& m, double tol = 0.0) {
  if (tol < 0) throw std::invalid_argument("is_psd: tolerance must be nonnegative");
  require_hermitian(m, "is_psd");
  return min_eigenvalue(m) >= -tol;
}

template <typename Derived>
auto trace_real(const Eigen::MatrixBase<Derived>& m) {
  return std::real(m.trace());
}

/// Real part of Tr(A B); exact for Hermitian A, B.
template <typename DA, typename DB>
auto trace_product(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  return std::real(a.cwiseProduct(b.transpose()).sum());
}

/// Principal square root of a PSD matrix. Eigenvalues in [-clamp_tol, 0] are
/// clamped to zero; anything more negative is a domain error.
template <typename Derived>
auto sqrtm_psd(const Eigen::MatrixBase<Derived>& m, double clamp_tol = kClampTol) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat h = m;
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  auto evals = es.eigenvalues().eval();
  for (Index i = 0; i < evals.size(); ++i) {
    if (evals(i) < Real(-clamp_tol))
      throw std::domain_error("sqrtm_psd: matrix has a negative eigenvalue beyond tolerance");
    evals(i) = std::sqrt(std::max(evals(i), Real(0)));
  }
  Mat out = es.eigenvectors() * evals.template cast<Scalar>().asDiagonal() *
            es.eigenvectors().adjoint();
  return out;
}

/// Square-root fidelity Tr sqrt(sqrt(S) X sqrt(S)). Operands may be subnormalized.
template <typename DS, typename DX>
auto sqrt_fidelity(const Eigen::MatrixBase<DS>& s, const Eigen::MatrixBase<DX>& x,
                   double clamp_tol = kClampTol) {
  using Scalar = typename DS::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (s.rows() != x.rows() || s.cols() != x.cols())
    throw std::invalid_argument("sqrt_fidelity: dimension mismatch");
  require_hermitian(s, "sqrt_fidelity");
  require_hermitian(x, "sqrt_fidelity");
  const Mat root = sqrtm_psd(s, clamp_tol);
  if (min_eigenvalue(x) < Real(-clamp_tol))
    throw std::domain_error("sqrt_fidelity: second operand is not PSD");
  Mat inner = root * Mat(x) * root;
  inner = (inner + inner.adjoint()).eval() * Scalar(Real(0.5));
  Eigen::SelfAdjointEigenSolver<Mat> es(inner, Eigen::EigenvaluesOnly);
  Real acc = 0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    acc += std::sqrt(std::max(es.eigenvalues()(i), Real(0)));
  return acc;
}

/// Kronecker product M (x) N.
template <typename DM, typename DN>
auto kron(const Eigen::MatrixBase<DM>& m, const Eigen::MatrixBase<DN>& n) {
  using Scalar = typename DM::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat out(m.rows() * n.rows(), m.cols() * n.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      out.block(i * n.rows(), j * n.cols(), n.rows(), n.cols()) = m(i, j) * n;
  return out;
}

/// Traces out the first tensor factor of an operator on C^dimA (x) C^dimB.
template <typename Derived>
auto partial_trace_A(const Eigen::MatrixBase<Derived>& m, Index dim_a, Index dim_b) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (dim_a < 1 || dim_b < 1 || m.rows() != dim_a * dim_b || m.cols() != dim_a * dim_b)
    throw std::invalid_argument("partial_trace_A: dimension mismatch");
  Mat out = Mat::Zero(dim_b, dim_b);
  for (Index i = 0; i < dim_a; ++i) out += m.block(i * dim_b, i * dim_b, dim_b, dim_b);
  return out;
}

/// Traces out the second tensor factor.
template <typename Derived>
auto partial_trace_B(const Eigen::MatrixBase<Derived>& m, Index dim_a, Index dim_b) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (dim_a < 1 || dim_b < 1 || m.rows() != dim_a * dim_b || m.cols() != dim_a * dim_b)
    throw std::invalid_argument("partial_trace_B: dimension mismatch");
  Mat out(dim_a, dim_a);
  for (Index i = 0; i < dim_a; ++i)
    for (Index j = 0; j < dim_a; ++j)
      out(i, j) = m.block(i * dim_b, j * dim_b, dim_b, dim_b).trace();
  return out;
}

template <typename Derived>
auto hermitian_part(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat out = (m + m.adjoint()) * Scalar(0.5);
  return out;
}

// ---------------------------------------------------------------------------
// Fixed qubit operators

template <typename Real = double>
HermitianOpT<Real> identity(Index dim) {
  return HermitianOpT<Real>::Identity(dim, dim);
}

template <typename Real = double>
HermitianOpT<Real> pauli_x() {
  HermitianOpT<Real> m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

template <typename Real = double>
HermitianOpT<Real> pauli_y() {
  using C = std::complex<Real>;
  HermitianOpT<Real> m(2, 2);
  m << C(0), C(0, -1), C(0, 1), C(0);
  return m;
}

template <typename Real = double>
HermitianOpT<Real> pauli_z() {
  HermitianOpT<Real> m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

/// |v><v| for a (not necessarily normalized) ket.
template <typename Derived>
auto projector(const Eigen::MatrixBase<Derived>& ket) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat out = ket * ket.adjoint();
  return out;
}

/// Orthonormal (Hilbert-Schmidt) basis of the real vector space of dim x dim
/// Hermitian matrices. The first dim elements are the diagonal units E_ii.
template <typename Real = double>
std::vector<HermitianOpT<Real>> hermitian_basis(Index dim) {
  using C = std::complex<Real>;
  std::vector<HermitianOpT<Real>> basis;
  basis.reserve(static_cast<std::size_t>(dim * dim));
  for (Index i = 0; i < dim; ++i) {
    HermitianOpT<Real> e = HermitianOpT<Real>::Zero(dim, dim);
    e(i, i) = 1;
    basis.push_back(e);
  }
  const Real r = Real(1) / std::sqrt(Real(2));
  for (Index i = 0; i < dim; ++i) {
    for (Index j = i + 1; j < dim; ++j) {
      HermitianOpT<Real> s = HermitianOpT<Real>::Zero(dim, dim);
      s(i, j) = r;
      s(j, i) = r;
      basis.push_back(s);
      HermitianOpT<Real> a = HermitianOpT<Real>::Zero(dim, dim);
      a(i, j) = C(0, -r);
      a(j, i) = C(0, r);
      basis.push_back(a);
    }
  }
  return basis;
}

/// Orthonormal basis of the traceless Hermitian matrices (dim^2 - 1 elements).
template <typename Real = double>
std::vector<HermitianOpT<Real>> traceless_basis(Index dim) {
  auto full = hermitian_basis<Real>(dim);
  std::vector<HermitianOpT<Real>> out;
  // Orthonormalize the diagonal differences E_kk - E_{k+1,k+1} (Gram-Schmidt on
  // the generalized Gell-Mann diagonal pattern).
  for (Index k = 1; k < dim; ++k) {
    HermitianOpT<Real> d = HermitianOpT<Real>::Zero(dim, dim);
    for (Index i = 0; i < k; ++i) d(i, i) = 1;
    d(k, k) = -Real(k);
    d /= std::sqrt(Real(k * (k + 1)));
    out.push_back(d);
  }
  for (std::size_t i = static_cast<std::size_t>(dim); i < full.size(); ++i) out.push_back(full[i]);
  return out;
}

/// Real coordinates of a Hermitian matrix in an orthonormal Hermitian basis.
template <typename Derived, typename Real>
Eigen::Matrix<Real, Eigen::Dynamic, 1> coordinates(const Eigen::MatrixBase<Derived>& m,
                                                   const std::vector<HermitianOpT<Real>>& basis) {
  Eigen::Matrix<Real, Eigen::Dynamic, 1> v(static_cast<Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k)
    v(static_cast<Index>(k)) = trace_product(basis[k], m);
  return v;
}

}  // namespace qat

#endif  // QAT_QMAT_HPP
