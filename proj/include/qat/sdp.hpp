#ifndef QAT_SDP_HPP
#define QAT_SDP_HPP

// Infeasible-start primal-dual interior-point method (HKM direction with
// Mehrotra predictor-corrector) for block-diagonal Hermitian SDPs:
//
//   (P)  maximize Tr(C X)   s.t. Tr(A_i X) = b_i,  X >= 0
//   (D)  minimize b'y       s.t. Z = sum_i y_i A_i - C >= 0
//
// Intended for many small blocks (qubit-sized) and a few hundred constraints.

#include "qat/qmat.hpp"

#include <utility>
#include <vector>

namespace qat::conic {

/// Block-diagonal Hermitian matrix given by its nonzero blocks.
struct SparseBlockMatrix {
  std::vector<std::pair<Index, HermitianOp>> blocks;
};

struct SdpProblem {
  std::vector<Index> block_dims;
  SparseBlockMatrix objective;                 // C
  std::vector<SparseBlockMatrix> constraints;  // A_i
  Eigen::VectorXd rhs;                         // b
};

struct SdpOptions {
  double tol = 1e-10;
  int max_iter = 120;
  double step_fraction = 0.95;
};

struct SdpResult {
  std::vector<HermitianOp> x;  // primal blocks
  std::vector<HermitianOp> z;  // dual slack blocks
  Eigen::VectorXd y;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double relative_gap = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
  bool converged = false;
};

SdpResult solve_sdp(const SdpProblem& problem, const SdpOptions& opts = {});

}  // namespace qat::conic

#endif  // QAT_SDP_HPP
