#ifndef QAT_STEERING_HPP
#define QAT_STEERING_HPP

#include "qat/assemblage.hpp"

#include <vector>

namespace qat {

/// Deterministic response function lambda: setting x -> outcome map[x].
struct DeterministicStrategy {
  std::vector<Index> map;
  /// D_lambda(a|x) in {0, 1}.
  int response(Index a, Index x) const { return map[static_cast<std::size_t>(x)] == a ? 1 : 0; }
};

/// All n_a^m strategies in lexicographic order (setting 0 most significant).
std::vector<DeterministicStrategy> deterministic_strategies(Index m, Index n_a);

enum class SdpMethod {
  InteriorPoint,  // primal-dual path following on the full primal/dual pair
  DualBarrier,    // log-barrier on the dual with a trace box
};

struct SteeringResult {
  double weight = 0.0;
  std::vector<HermitianOp> lhs_members;  // sigma_lambda, one per strategy
  double gap = 0.0;
};

/// Steering weight: 1 - max sum_lambda Tr sigma_lambda subject to sigma_lambda >= 0
/// and sum_lambda D_lambda(a|x) sigma_lambda <= sigma_{a|x}.
SteeringResult steering_weight(const Assemblage& a, double tol = 1e-7,
                               SdpMethod method = SdpMethod::InteriorPoint);

/// Largest violation of the certificate inequalities: max over (a, x) of
/// -lambda_min(sigma_{a|x} - sum D sigma_lambda), and of -lambda_min(sigma_lambda).
double certificate_violation(const Assemblage& a, const SteeringResult& r);

}  // namespace qat

#endif  // QAT_STEERING_HPP
