#include "qat/steering.hpp"

#include "qat/barrier.hpp"
#include "qat/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qat {

std::vector<DeterministicStrategy> deterministic_strategies(Index m, Index n_a) {
  if (m < 1 || n_a < 1) throw std::invalid_argument("deterministic_strategies: m and n_a must be positive");
  double count = 1.0;
  for (Index i = 0; i < m; ++i) {
    count *= static_cast<double>(n_a);
    if (count > 1e6) throw std::overflow_error("deterministic_strategies: more than 1e6 strategies");
  }
  const auto total = static_cast<std::size_t>(count);
  std::vector<DeterministicStrategy> out(total);
  for (std::size_t k = 0; k < total; ++k) {
    out[k].map.assign(static_cast<std::size_t>(m), 0);
    std::size_t r = k;
    for (Index x = m - 1; x >= 0; --x) {
      out[k].map[static_cast<std::size_t>(x)] = static_cast<Index>(r % static_cast<std::size_t>(n_a));
      r /= static_cast<std::size_t>(n_a);
    }
  }
  return out;
}

namespace {

void require_valid(const Assemblage& a) {
  a.validate(Tolerances{1e-7, 1e-7, 1e-7});
}

SteeringResult weight_interior_point(const Assemblage& a, double tol) {
  const Index m = a.settings(), n = a.outcomes(), d = a.dim();
  const auto strategies = deterministic_strategies(m, n);
  const auto nl = static_cast<Index>(strategies.size());
  const auto basis = hermitian_basis(d);

  conic::SdpProblem p;
  p.block_dims.assign(static_cast<std::size_t>(nl + m * n), d);
  for (Index l = 0; l < nl; ++l) p.objective.blocks.emplace_back(l, identity(d));
  const auto slack = [&](Index o, Index x) { return nl + x * n + o; };

  std::vector<double> rhs;
  for (Index x = 0; x < m; ++x)
    for (Index o = 0; o < n; ++o)
      for (const auto& bk : basis) {
        conic::SparseBlockMatrix row;
        row.blocks.emplace_back(slack(o, x), bk);
        for (Index l = 0; l < nl; ++l)
          if (strategies[static_cast<std::size_t>(l)].response(o, x)) row.blocks.emplace_back(l, bk);
        p.constraints.push_back(std::move(row));
        rhs.push_back(trace_product(bk, a(o, x)));
      }
  p.rhs = Eigen::Map<Eigen::VectorXd>(rhs.data(), static_cast<Index>(rhs.size()));

  conic::SdpOptions opts;
  opts.tol = std::min(1e-9, tol * 1e-2);
  const auto sol = conic::solve_sdp(p, opts);
  const double gap = std::abs(sol.primal_objective - sol.dual_objective) +
                     sol.primal_infeasibility + sol.dual_infeasibility;
  if (gap > tol)
    throw std::runtime_error("steering_weight: interior-point gap " + std::to_string(gap) + " above tolerance");

  SteeringResult r;
  r.weight = std::clamp(1.0 - 0.5 * (sol.primal_objective + sol.dual_objective), 0.0, 1.0);
  r.gap = gap;
  for (Index l = 0; l < nl; ++l) r.lhs_members.push_back(sol.x[static_cast<std::size_t>(l)]);
  return r;
}

SteeringResult weight_dual_barrier(const Assemblage& a, double tol) {
  const Index m = a.settings(), n = a.outcomes(), d = a.dim();
  const auto strategies = deterministic_strategies(m, n);
  const auto nl = static_cast<Index>(strategies.size());
  const auto basis = hermitian_basis(d);
  const auto q = static_cast<Index>(basis.size());
  const double box = 1e3;

  // Variables: coordinates of F_{a|x} in the Hermitian basis.
  const auto var = [&](Index o, Index x, Index k) { return (x * n + o) * q + k; };
  conic::BarrierProblem bp;
  bp.num_vars = m * n * q;
  bp.linear = Eigen::VectorXd::Zero(bp.num_vars);
  for (Index x = 0; x < m; ++x)
    for (Index o = 0; o < n; ++o)
      for (Index k = 0; k < q; ++k)
        bp.linear(var(o, x, k)) = -trace_product(basis[static_cast<std::size_t>(k)], a(o, x));

  for (Index l = 0; l < nl; ++l) {
    conic::AffineHermitian lmi{-identity(d), {}};
    for (Index x = 0; x < m; ++x)
      for (Index k = 0; k < q; ++k)
        lmi.terms.emplace_back(var(strategies[static_cast<std::size_t>(l)].map[static_cast<std::size_t>(x)], x, k),
                               basis[static_cast<std::size_t>(k)]);
    bp.lmis.push_back(std::move(lmi));
  }
  for (Index x = 0; x < m; ++x)
    for (Index o = 0; o < n; ++o) {
      conic::AffineHermitian pos{HermitianOp::Zero(d, d), {}};
      conic::AffineHermitian cap{HermitianOp::Constant(1, 1, box), {}};
      for (Index k = 0; k < q; ++k) {
        pos.terms.emplace_back(var(o, x, k), basis[static_cast<std::size_t>(k)]);
        cap.terms.emplace_back(var(o, x, k),
                               HermitianOp::Constant(1, 1, -std::real(basis[static_cast<std::size_t>(k)].trace())));
      }
      bp.lmis.push_back(std::move(pos));
      bp.lmis.push_back(std::move(cap));
    }

  const conic::BarrierSolver solver(bp);
  Eigen::VectorXd start(bp.num_vars);
  const Eigen::VectorXd two_id = coordinates(HermitianOp(2.0 * identity(d)), basis);
  for (Index x = 0; x < m; ++x)
    for (Index o = 0; o < n; ++o) start.segment((x * n + o) * q, q) = two_id;

  conic::BarrierOptions opts;
  opts.gap_tol = tol * 0.1;
  const auto res = solver.maximize(start, opts);
  if (!res.converged || res.gap > tol)
    throw std::runtime_error("steering_weight: barrier gap " + std::to_string(res.gap) + " above tolerance");

  SteeringResult r;
  r.weight = std::clamp(1.0 + res.objective, 0.0, 1.0);
  r.gap = res.gap;
  const auto duals = solver.lmi_duals(res);
  for (Index l = 0; l < nl; ++l) r.lhs_members.push_back(duals[static_cast<std::size_t>(l)]);
  return r;
}

}  // namespace

SteeringResult steering_weight(const Assemblage& a, double tol, SdpMethod method) {
  if (!(tol > 0.0)) throw std::invalid_argument("steering_weight: tolerance must be positive");
  require_valid(a);
  return method == SdpMethod::InteriorPoint ? weight_interior_point(a, tol) : weight_dual_barrier(a, tol);
}

double certificate_violation(const Assemblage& a, const SteeringResult& r) {
  const auto strategies = deterministic_strategies(a.settings(), a.outcomes());
  if (r.lhs_members.size() != strategies.size())
    throw std::invalid_argument("certificate_violation: certificate count mismatch");
  double worst = 0.0;
  for (const auto& s : r.lhs_members) worst = std::max(worst, -min_eigenvalue(s));
  for (Index x = 0; x < a.settings(); ++x)
    for (Index o = 0; o < a.outcomes(); ++o) {
      HermitianOp deficit = a(o, x);
      for (std::size_t l = 0; l < strategies.size(); ++l)
        if (strategies[l].response(o, x)) deficit -= r.lhs_members[l];
      worst = std::max(worst, -min_eigenvalue(hermitian_part(deficit)));
    }
  return worst;
}

}  // namespace qat
