#include "qat/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qat::conic {

namespace {

using Blocks = std::vector<HermitianOp>;

double frob2(const HermitianOp& m) { return m.squaredNorm(); }

// Largest alpha in (0, inf] with X + alpha D >= 0, for X positive definite.
double max_step(const Blocks& x, const Blocks& d) {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) {
    Eigen::GeneralizedSelfAdjointEigenSolver<HermitianOp> ges(d[k], x[k], Eigen::EigenvaluesOnly);
    const double lo = ges.eigenvalues().minCoeff();
    if (lo < 0.0) alpha = std::min(alpha, -1.0 / lo);
  }
  return alpha;
}

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += trace_product(a[k], b[k]);
  return s;
}

}  // namespace

SdpResult solve_sdp(const SdpProblem& problem, const SdpOptions& opts) {
  const std::size_t nb = problem.block_dims.size();
  const Index ncon = static_cast<Index>(problem.constraints.size());
  if (problem.rhs.size() != ncon) throw std::invalid_argument("solve_sdp: rhs size mismatch");
  auto check = [&](const SparseBlockMatrix& m) {
    for (const auto& [k, blk] : m.blocks) {
      if (k < 0 || static_cast<std::size_t>(k) >= nb) throw std::invalid_argument("solve_sdp: block index");
      const Index d = problem.block_dims[static_cast<std::size_t>(k)];
      if (blk.rows() != d || blk.cols() != d) throw std::invalid_argument("solve_sdp: block dimension");
    }
  };
  check(problem.objective);
  for (const auto& a : problem.constraints) check(a);

  // Dense copies of C, and for each block the constraints touching it.
  Blocks c(nb);
  double total_dim = 0.0;
  for (std::size_t k = 0; k < nb; ++k) {
    const Index d = problem.block_dims[k];
    c[k] = HermitianOp::Zero(d, d);
    total_dim += static_cast<double>(d);
  }
  for (const auto& [k, blk] : problem.objective.blocks) c[static_cast<std::size_t>(k)] += blk;
  std::vector<std::vector<std::pair<Index, const HermitianOp*>>> touching(nb);
  for (Index i = 0; i < ncon; ++i)
    for (const auto& [k, blk] : problem.constraints[static_cast<std::size_t>(i)].blocks)
      touching[static_cast<std::size_t>(k)].emplace_back(i, &blk);

  const Eigen::VectorXd& b = problem.rhs;
  double c_norm = 0.0;
  for (const auto& blk : c) c_norm += frob2(blk);
  c_norm = std::sqrt(c_norm);
  const double b_norm = b.norm();

  // Starting point scaled to the data.
  double alpha0 = 1.0, a_max = 0.0;
  for (Index i = 0; i < ncon; ++i) {
    double an = 0.0;
    for (const auto& [k, blk] : problem.constraints[static_cast<std::size_t>(i)].blocks) an += frob2(blk);
    an = std::sqrt(an);
    a_max = std::max(a_max, an);
    alpha0 = std::max(alpha0, total_dim * (1.0 + std::abs(b(i))) / (1.0 + an));
  }
  const double beta0 = std::max(1.0, (1.0 + std::max(a_max, c_norm)) / std::sqrt(total_dim));

  Blocks x(nb), z(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const Index d = problem.block_dims[k];
    x[k] = 10.0 * alpha0 * HermitianOp::Identity(d, d);
    z[k] = 10.0 * beta0 * HermitianOp::Identity(d, d);
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(ncon);

  auto apply_a = [&](const Blocks& m) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(ncon);
    for (std::size_t k = 0; k < nb; ++k)
      for (const auto& [i, blk] : touching[k]) out(i) += trace_product(*blk, m[k]);
    return out;
  };
  auto apply_at = [&](const Eigen::VectorXd& v) {
    Blocks out(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      const Index d = problem.block_dims[k];
      out[k] = HermitianOp::Zero(d, d);
      for (const auto& [i, blk] : touching[k]) out[k] += v(i) * (*blk);
    }
    return out;
  };

  SdpResult res;
  Blocks zinv(nb), rd(nb);
  for (int it = 0; it < opts.max_iter; ++it) {
    res.iterations = it;
    // Residuals.
    const Eigen::VectorXd rp = b - apply_a(x);
    const Blocks aty = apply_at(y);
    double rd_norm = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      rd[k] = c[k] + z[k] - aty[k];
      rd_norm += frob2(rd[k]);
    }
    rd_norm = std::sqrt(rd_norm);
    const double pobj = inner(c, x);
    const double dobj = b.dot(y);
    const double mu = inner(x, z) / total_dim;
    res.primal_objective = pobj;
    res.dual_objective = dobj;
    res.primal_infeasibility = rp.norm() / (1.0 + b_norm);
    res.dual_infeasibility = rd_norm / (1.0 + c_norm);
    res.relative_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (res.primal_infeasibility < opts.tol && res.dual_infeasibility < opts.tol && res.relative_gap < opts.tol) {
      res.converged = true;
      break;
    }

    for (std::size_t k = 0; k < nb; ++k) {
      Eigen::LLT<HermitianOp> llt(z[k]);
      if (llt.info() != Eigen::Success) throw std::runtime_error("solve_sdp: dual slack lost definiteness");
      zinv[k] = llt.solve(HermitianOp::Identity(z[k].rows(), z[k].cols()));
    }

    // Schur complement M_ij = Re Tr(A_i X A_j Z^-1).
    Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(ncon, ncon);
    for (std::size_t k = 0; k < nb; ++k) {
      const auto& tk = touching[k];
      std::vector<HermitianOp> w(tk.size());
      for (std::size_t q = 0; q < tk.size(); ++q) w[q] = x[k] * (*tk[q].second) * zinv[k];
      for (std::size_t p = 0; p < tk.size(); ++p)
        for (std::size_t q = 0; q < tk.size(); ++q)
          schur(tk[p].first, tk[q].first) += trace_product(*tk[p].second, w[q]);
    }
    schur = 0.5 * (schur + schur.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> schur_llt(schur);
    if (schur_llt.info() != Eigen::Success) {
      schur.diagonal().array() += 1e-14 * (1.0 + schur.diagonal().cwiseAbs().maxCoeff());
      schur_llt.compute(schur);
      if (schur_llt.info() != Eigen::Success) break;
    }

    // Search direction for target mu_t and second-order correction `corr` (may be empty).
    auto direction = [&](double mu_t, const Blocks* corr, Blocks& dx, Eigen::VectorXd& dy, Blocks& dz) {
      Blocks g(nb);  // (mu_t I - XZ - corr) Z^-1 + X Rd Z^-1
      for (std::size_t k = 0; k < nb; ++k) {
        HermitianOp t = mu_t * zinv[k] - x[k] + x[k] * rd[k] * zinv[k];
        if (corr) t -= (*corr)[k] * zinv[k];
        g[k] = t;
      }
      Eigen::VectorXd rhs = -rp;
      for (std::size_t k = 0; k < nb; ++k)
        for (const auto& [i, blk] : touching[k]) rhs(i) += trace_product(*blk, g[k]);
      dy = schur_llt.solve(rhs);
      dz = apply_at(dy);
      dx.resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        dz[k] -= rd[k];
        HermitianOp t = (mu_t * zinv[k] - x[k]) - x[k] * dz[k] * zinv[k];
        if (corr) t -= (*corr)[k] * zinv[k];
        dx[k] = hermitian_part(t);
        dz[k] = hermitian_part(dz[k]);
      }
    };

    Blocks dx, dz;
    Eigen::VectorXd dy;
    direction(0.0, nullptr, dx, dy, dz);
    const double ap_aff = std::min(1.0, max_step(x, dx));
    const double ad_aff = std::min(1.0, max_step(z, dz));
    double mu_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k)
      mu_aff += trace_product(HermitianOp(x[k] + ap_aff * dx[k]), HermitianOp(z[k] + ad_aff * dz[k]));
    mu_aff /= total_dim;
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    Blocks corr(nb);
    for (std::size_t k = 0; k < nb; ++k) corr[k] = dx[k] * dz[k];
    direction(sigma * mu, &corr, dx, dy, dz);

    const double ap = std::min(1.0, opts.step_fraction * max_step(x, dx));
    const double ad = std::min(1.0, opts.step_fraction * max_step(z, dz));
    if (!(ap > 1e-14 && ad > 1e-14)) break;
    for (std::size_t k = 0; k < nb; ++k) {
      x[k] = hermitian_part(HermitianOp(x[k] + ap * dx[k]));
      z[k] = hermitian_part(HermitianOp(z[k] + ad * dz[k]));
    }
    y += ad * dy;
    res.iterations = it + 1;
  }
  res.x = std::move(x);
  res.z = std::move(z);
  res.y = std::move(y);
  return res;
}

}  // namespace qat::conic
