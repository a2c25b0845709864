#ifndef QAT_BARRIER_HPP
#define QAT_BARRIER_HPP

// Log-barrier interior-point method for small concave programs of the form
//
//   maximize   c'v + sum_k w_k log(a_k'v + b_k)
//   subject to A_j(v) = A_j0 + sum_i v_i A_ji  positive definite,
//
// with Hermitian A_ji. Each A_j is stored in real Hilbert-Schmidt coordinates
// so that Newton systems are assembled from small dense blocks. The duality gap
// of the returned point is bounded by (sum_j dim A_j) / t. When Newton stalls in
// finite precision the last centred point backs the certificate.

#include "qat/qmat.hpp"

#include <utility>
#include <vector>

namespace qat::conic {

/// w * log(constant + sum coeff_i v_i)
struct LogTerm {
  double weight = 1.0;
  double constant = 0.0;
  std::vector<std::pair<Index, double>> coeffs;
};

/// A(v) = constant + sum_i v_{terms[i].first} * terms[i].second
struct AffineHermitian {
  HermitianOp constant;
  std::vector<std::pair<Index, HermitianOp>> terms;
};

struct BarrierProblem {
  Index num_vars = 0;
  Eigen::VectorXd linear;  // empty means zero
  std::vector<LogTerm> log_terms;
  std::vector<AffineHermitian> lmis;
};

struct BarrierOptions {
  double gap_tol = 1e-9;       // bound on objective suboptimality
  bool relative_gap = false;   // scale gap_tol by max(1, |objective|)
  double mu = 12.0;            // barrier parameter growth per stage
  double centering_tol = 1e-10;  // Newton decrement^2 / 2 threshold
  int max_newton = 3000;
};

struct BarrierResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  double gap = 0.0;  // certified bound nu / t (plus centering slack)
  double t = 0.0;
  int newton_steps = 0;
  bool converged = false;
};

/// Compiled form of a BarrierProblem; reusable across solves (reentrant).
class BarrierSolver {
 public:
  explicit BarrierSolver(const BarrierProblem& problem);

  /// `start` must be strictly feasible.
  BarrierResult maximize(const Eigen::VectorXd& start, const BarrierOptions& opts = {}) const;

  /// Objective value c'v + sum w log(.); -inf outside the log domain.
  double objective(const Eigen::VectorXd& v) const;
  /// True iff every LMI is positive definite and every log argument positive.
  bool strictly_feasible(const Eigen::VectorXd& v) const;
  /// Evaluated LMI matrices A_j(v).
  std::vector<HermitianOp> lmi_values(const Eigen::VectorXd& v) const;
  /// Barrier dual estimates (1/t) A_j(v)^{-1}.
  std::vector<HermitianOp> lmi_duals(const BarrierResult& r) const;

  Index num_vars() const { return n_; }
  double barrier_degree() const { return nu_; }

 private:
  struct CompiledLmi {
    Index dim;
    std::vector<Index> vars;
    Eigen::MatrixXd lift;      // d^2 x K: coordinates of each coefficient matrix
    Eigen::VectorXd base;      // d^2: coordinates of the constant
  };

  HermitianOp assemble(const CompiledLmi& lmi, const Eigen::VectorXd& v) const;
  // Returns false if v is outside the domain. Fills value/gradient/hessian of
  // t*f + sum log det when the pointers are non-null.
  bool evaluate(const Eigen::VectorXd& v, double t, double* value, Eigen::VectorXd* grad,
                Eigen::MatrixXd* hess) const;

  Index n_ = 0;
  double nu_ = 0.0;
  Eigen::VectorXd linear_;
  std::vector<LogTerm> logs_;
  std::vector<CompiledLmi> lmis_;
  std::vector<std::vector<HermitianOp>> bases_;  // Hermitian basis per dimension
};

}  // namespace qat::conic

#endif  // QAT_BARRIER_HPP
