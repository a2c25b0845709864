#include "qat/barrier.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qat::conic {

BarrierSolver::BarrierSolver(const BarrierProblem& problem)
    : n_(problem.num_vars), linear_(problem.linear), logs_(problem.log_terms) {
  if (n_ < 1) throw std::invalid_argument("BarrierSolver: no variables");
  if (linear_.size() == 0) linear_ = Eigen::VectorXd::Zero(n_);
  if (linear_.size() != n_) throw std::invalid_argument("BarrierSolver: linear term has wrong size");
  for (const auto& lt : logs_)
    for (const auto& [i, c] : lt.coeffs)
      if (i < 0 || i >= n_) throw std::invalid_argument("BarrierSolver: log term index out of range");

  for (const auto& lmi : problem.lmis) {
    const Index d = lmi.constant.rows();
    if (d < 1 || lmi.constant.cols() != d) throw std::invalid_argument("BarrierSolver: malformed LMI");
    if (static_cast<Index>(bases_.size()) <= d) bases_.resize(static_cast<std::size_t>(d + 1));
    auto& basis = bases_[static_cast<std::size_t>(d)];
    if (basis.empty()) basis = hermitian_basis(d);

    CompiledLmi c;
    c.dim = d;
    c.base = coordinates(lmi.constant, basis);
    // Merge repeated variable indices.
    std::vector<std::pair<Index, Eigen::VectorXd>> cols;
    for (const auto& [i, m] : lmi.terms) {
      if (i < 0 || i >= n_) throw std::invalid_argument("BarrierSolver: LMI index out of range");
      if (m.rows() != d || m.cols() != d) throw std::invalid_argument("BarrierSolver: LMI term dimension");
      Eigen::VectorXd coord = coordinates(m, basis);
      bool merged = false;
      for (auto& [j, col] : cols)
        if (j == i) {
          col += coord;
          merged = true;
        }
      if (!merged) cols.emplace_back(i, coord);
    }
    c.lift.resize(d * d, static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
      c.vars.push_back(cols[k].first);
      c.lift.col(static_cast<Index>(k)) = cols[k].second;
    }
    nu_ += static_cast<double>(d);
    lmis_.push_back(std::move(c));
  }
}

HermitianOp BarrierSolver::assemble(const CompiledLmi& lmi, const Eigen::VectorXd& v) const {
  Eigen::VectorXd coord = lmi.base;
  for (std::size_t k = 0; k < lmi.vars.size(); ++k) coord += lmi.lift.col(static_cast<Index>(k)) * v(lmi.vars[k]);
  const auto& basis = bases_[static_cast<std::size_t>(lmi.dim)];
  HermitianOp a = HermitianOp::Zero(lmi.dim, lmi.dim);
  for (std::size_t i = 0; i < basis.size(); ++i) a += coord(static_cast<Index>(i)) * basis[i];
  return a;
}

std::vector<HermitianOp> BarrierSolver::lmi_values(const Eigen::VectorXd& v) const {
  std::vector<HermitianOp> out;
  out.reserve(lmis_.size());
  for (const auto& l : lmis_) out.push_back(assemble(l, v));
  return out;
}

double BarrierSolver::objective(const Eigen::VectorXd& v) const {
  double f = linear_.dot(v);
  for (const auto& lt : logs_) {
    double s = lt.constant;
    for (const auto& [i, c] : lt.coeffs) s += c * v(i);
    if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
    f += lt.weight * std::log(s);
  }
  return f;
}

bool BarrierSolver::strictly_feasible(const Eigen::VectorXd& v) const {
  if (!std::isfinite(objective(v))) return false;
  for (const auto& l : lmis_) {
    Eigen::LLT<HermitianOp> llt(assemble(l, v));
    if (llt.info() != Eigen::Success) return false;
  }
  return true;
}

bool BarrierSolver::evaluate(const Eigen::VectorXd& v, double t, double* value, Eigen::VectorXd* grad,
                             Eigen::MatrixXd* hess) const {
  double val = t * linear_.dot(v);
  if (grad) *grad = t * linear_;
  if (hess) hess->setZero(n_, n_);

  for (const auto& lt : logs_) {
    double s = lt.constant;
    for (const auto& [i, c] : lt.coeffs) s += c * v(i);
    if (!(s > 0.0)) return false;
    val += t * lt.weight * std::log(s);
    if (grad)
      for (const auto& [i, c] : lt.coeffs) (*grad)(i) += t * lt.weight * c / s;
    if (hess) {
      const double h = t * lt.weight / (s * s);
      for (const auto& [i, ci] : lt.coeffs)
        for (const auto& [j, cj] : lt.coeffs) (*hess)(i, j) -= h * ci * cj;
    }
  }

  for (const auto& l : lmis_) {
    HermitianOp a = assemble(l, v);
    Eigen::LLT<HermitianOp> llt(a);
    if (llt.info() != Eigen::Success) return false;
    const Eigen::VectorXd diag = llt.matrixLLT().diagonal().real();
    for (Index i = 0; i < diag.size(); ++i) {
      if (!(diag(i) > 0.0)) return false;
      val += 2.0 * std::log(diag(i));
    }
    if (!grad && !hess) continue;
    const HermitianOp inv = llt.solve(HermitianOp::Identity(l.dim, l.dim));
    const auto& basis = bases_[static_cast<std::size_t>(l.dim)];
    const Index q = static_cast<Index>(basis.size());
    std::vector<HermitianOp> p(basis.size());
    Eigen::VectorXd gc(q);
    for (Index i = 0; i < q; ++i) {
      p[static_cast<std::size_t>(i)] = inv * basis[static_cast<std::size_t>(i)];
      gc(i) = std::real(p[static_cast<std::size_t>(i)].trace());
    }
    if (grad) {
      const Eigen::VectorXd gl = l.lift.transpose() * gc;
      for (std::size_t k = 0; k < l.vars.size(); ++k) (*grad)(l.vars[k]) += gl(static_cast<Index>(k));
    }
    if (hess) {
      Eigen::MatrixXd hc(q, q);
      for (Index i = 0; i < q; ++i)
        for (Index j = i; j < q; ++j) {
          const double h = -trace_product(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
          hc(i, j) = h;
          hc(j, i) = h;
        }
      const Eigen::MatrixXd hl = l.lift.transpose() * hc * l.lift;
      for (std::size_t a = 0; a < l.vars.size(); ++a)
        for (std::size_t b = 0; b < l.vars.size(); ++b)
          (*hess)(l.vars[a], l.vars[b]) += hl(static_cast<Index>(a), static_cast<Index>(b));
    }
  }
  if (value) *value = val;
  return true;
}

BarrierResult BarrierSolver::maximize(const Eigen::VectorXd& start, const BarrierOptions& opts) const {
  if (start.size() != n_) throw std::invalid_argument("BarrierSolver: start has wrong size");
  if (!strictly_feasible(start)) throw std::invalid_argument("BarrierSolver: start is not strictly feasible");

  BarrierResult r;
  r.x = start;
  const double f0 = objective(start);
  double t = nu_ > 0.0 ? nu_ / (1.0 + std::abs(f0)) : 1.0;

  Eigen::VectorXd g(n_), dx(n_), trial(n_);
  Eigen::MatrixXd h(n_, n_);
  bool stalled = false;
  const auto target = [&](double f) {
    return opts.relative_gap ? opts.gap_tol * std::max(1.0, std::abs(f)) : opts.gap_tol;
  };

  // Last centred iterate and its certified bound.
  Eigen::VectorXd certified_x = start;
  double certified_f = f0, certified_gap = std::numeric_limits<double>::infinity(), certified_t = t;

  for (;;) {
    // Centering by damped Newton.
    double lambda2 = 0.0;
    for (;;) {
      if (r.newton_steps >= opts.max_newton) break;
      double val = 0.0;
      if (!evaluate(r.x, t, &val, &g, &h))
        throw std::logic_error("BarrierSolver: iterate left the domain");
      Eigen::MatrixXd neg = -h;
      Eigen::LLT<Eigen::MatrixXd> llt(neg);
      if (llt.info() != Eigen::Success) {
        const double ridge = 1e-12 * (1.0 + neg.diagonal().cwiseAbs().maxCoeff());
        neg.diagonal().array() += ridge;
        llt.compute(neg);
        if (llt.info() != Eigen::Success) {
          stalled = true;
          break;
        }
      }
      dx = llt.solve(g);
      lambda2 = g.dot(dx);
      if (!(lambda2 >= 0.0) || !dx.allFinite()) {
        stalled = true;
        break;
      }
      if (lambda2 / 2.0 <= opts.centering_tol) break;
      const double lambda = std::sqrt(lambda2);
      double step = lambda > 0.25 ? 1.0 / (1.0 + lambda) : 1.0;
      bool accepted = false;
      while (step > 1e-16) {
        trial = r.x + step * dx;
        double tv = 0.0;
        if (evaluate(trial, t, &tv, nullptr, nullptr) &&
            (lambda <= 0.25 || tv >= val - 1e-12 * (1.0 + std::abs(val)))) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      ++r.newton_steps;
      if (!accepted) {
        stalled = true;
        break;
      }
      r.x = trial;
    }
    if (stalled || r.newton_steps >= opts.max_newton) break;
    certified_x = r.x;
    certified_f = objective(r.x);
    certified_gap = nu_ / t + lambda2;
    certified_t = t;
    if (nu_ / t <= target(certified_f)) break;
    t *= opts.mu;
  }

  // A stalled iterate inherits the centred bound minus whatever it gained.
  const double f = objective(r.x);
  if ((stalled || r.newton_steps >= opts.max_newton) && !(f >= certified_f)) {
    r.x = certified_x;
    r.objective = certified_f;
    r.gap = certified_gap;
    r.t = certified_t;
  } else {
    r.objective = f;
    r.gap = std::max(0.0, certified_gap - (f - certified_f));
    r.t = t;
  }
  r.converged = r.gap <= target(r.objective);
  return r;
}

std::vector<HermitianOp> BarrierSolver::lmi_duals(const BarrierResult& r) const {
  std::vector<HermitianOp> out;
  for (const auto& l : lmis_) {
    HermitianOp a = assemble(l, r.x);
    Eigen::LLT<HermitianOp> llt(a);
    out.push_back(llt.solve(HermitianOp::Identity(l.dim, l.dim)) / r.t);
  }
  return out;
}

}  // namespace qat::conic
