#include "qat/solver.hpp"

#include "qat/barrier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace qat {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMinEps = 1e-9;
// Below this eigenvalue rho_B is treated as singular and the inner step skipped.
constexpr double kRhoFloor = 1e-9;

// Observed element of outcome a as alpha * rho + beta * S.
struct Mix {
  double alpha;
  double beta;
};

std::array<Mix, 3> outcome_maps(double eps, double gamma) {
  const double cp = plus_scale(eps, gamma);
  const double cm = minus_scale(eps, gamma);
  return {Mix{0.0, cp}, Mix{cm, -cm}, Mix{1.0 - cm, -gamma}};
}

void check_shape(const CountTensor& data, const MeasurementSet& bob) {
  if (data.alice_outcomes() != 3)
    throw std::invalid_argument("fit: counts must carry the outcomes {+, -, null}");
  if (bob.settings() != data.bob_settings() || bob.outcomes() != data.bob_outcomes())
    throw std::invalid_argument("fit: Bob's measurements do not match the counts");
}

void add_term(conic::LogTerm& t, Index var, double c) {
  if (c != 0.0) t.coeffs.emplace_back(var, c);
}

std::vector<HermitianOp> observed_setting(const HermitianOp& rho, const HermitianOp& s, double eps, double gamma) {
  const double cp = plus_scale(eps, gamma);
  const double cm = minus_scale(eps, gamma);
  HermitianOp sp = cp * s;
  HermitianOp sm = cm * (rho - s);
  HermitianOp s0 = hermitian_part(HermitianOp(rho - sp - sm));
  return {hermitian_part(sp), hermitian_part(sm), s0};
}

double setting_ll(const CountTensor& data, const MeasurementSet& bob, Index x,
                  const std::vector<HermitianOp>& elements) {
  double acc = 0.0;
  for (Index a = 0; a < data.alice_outcomes(); ++a)
    for (Index y = 0; y < data.bob_settings(); ++y)
      for (Index b = 0; b < data.bob_outcomes(); ++b) {
        const auto n = data(x, a, y, b);
        if (n == 0) continue;
        const double p = trace_product(bob(b, y), elements[static_cast<std::size_t>(a)]);
        if (!(p > 0.0)) return kNegInf;
        acc += static_cast<double>(n) * std::log(p);
      }
  return acc;
}

HermitianOp from_coords(const Eigen::VectorXd& v, Index offset, const std::vector<HermitianOp>& basis,
                        HermitianOp start) {
  for (std::size_t k = 0; k < basis.size(); ++k) start += v(offset + static_cast<Index>(k)) * basis[k];
  return hermitian_part(start);
}

FitDiagnostics diagnose(const Assemblage& a, const LossParams& p) {
  FitDiagnostics d;
  d.ns_defect = ns_defect(a);
  d.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& row : a.elements())
    for (const auto& e : row) d.min_eigenvalue = std::min(d.min_eigenvalue, min_eigenvalue(e));
  for (std::size_t x = 0; x < p.eps.size(); ++x)
    d.bound_violation = std::max(d.bound_violation, std::abs(p.gamma[x]) - (1.0 - p.eps[x]));
  return d;
}

void finish(FitResult& r, Index m, Index dim, Index bob_settings) {
  r.p = param_count(r.model, m, dim, bob_settings);
  r.aic = aic(r.logL, r.p);
  if (r.n > static_cast<std::int64_t>(r.p) + 1)
    r.aicc = aicc(r.aic, r.p, r.n);
  else
    r.aicc.reset();
}

// Working point of the see-saw.
struct Iterate {
  LosslessState state;
  LossParams params;
  double logL = kNegInf;
  int solves = 0;
};

double null_fraction(const CountTensor& data, Index x) {
  const auto tot = data.setting_total(x);
  return tot > 0 ? static_cast<double>(data.outcome_total(x, kNull)) / static_cast<double>(tot) : -1.0;
}

// Exact efficiency update with gamma = 0 and the shape fixed: the conclusive
// fraction, per setting (M2) or pooled (M1).
LossParams efficiency_update(const CountTensor& data, const LossParams& cur, bool pooled) {
  LossParams out = cur;
  const Index m = data.alice_settings();
  if (pooled) {
    std::int64_t conc = 0, tot = 0;
    for (Index x = 0; x < m; ++x) {
      tot += data.setting_total(x);
      conc += data.outcome_total(x, kPlus) + data.outcome_total(x, kMinus);
    }
    if (tot > 0) {
      const double e = std::clamp(static_cast<double>(conc) / static_cast<double>(tot), kMinEps, 1.0);
      std::fill(out.eps.begin(), out.eps.end(), e);
    }
  } else {
    for (Index x = 0; x < m; ++x) {
      const double f = null_fraction(data, x);
      if (f >= 0.0) out.eps[static_cast<std::size_t>(x)] = std::clamp(1.0 - f, kMinEps, 1.0);
    }
  }
  std::fill(out.gamma.begin(), out.gamma.end(), 0.0);
  return out;
}

Iterate fit_efficiency_model(const CountTensor& data, const MeasurementSet& bob, const FitConfig& cfg, bool pooled,
                             std::vector<std::pair<int, double>>& trace, bool& converged) {
  const Index m = data.alice_settings();
  double mean_null = 0.0;
  int counted = 0;
  for (Index x = 0; x < m; ++x) {
    const double f = null_fraction(data, x);
    if (f >= 0.0) {
      mean_null += f;
      ++counted;
    }
  }
  const double e0 = counted > 0 ? std::clamp(1.0 - mean_null / counted, kMinEps, 1.0) : 1.0;

  Iterate it;
  it.params = LossParams::uniform(m, e0);
  converged = false;
  for (int k = 1; k <= cfg.max_outer; ++k) {
    const double before = it.logL;
    auto sub = convex_mle_subproblem(data, bob, it.params, std::nullopt, std::nullopt, cfg.subproblem_tol);
    ++it.solves;
    if (sub.logL > it.logL || it.state.plus.empty()) {
      it.state = std::move(sub.state);
      it.logL = sub.logL;
    }
    const LossParams next = efficiency_update(data, it.params, pooled);
    const double updated = log_likelihood(data, observed_assemblage(it.state, next), bob);
    if (updated > it.logL) {
      it.params = next;
      it.logL = updated;
    }
    trace.emplace_back(k, it.logL);
    if (std::isfinite(before) && it.logL - before < cfg.outer_tol) {
      converged = true;
      break;
    }
  }
  return it;
}

SettingFit inner_fit(const CountTensor& data, const MeasurementSet& bob, Index x, double gamma, const HermitianOp& rho,
                     const FitConfig& cfg, int& solves) {
  if (cfg.inner_solve == InnerSolve::Joint) {
    ++solves;
    return fit_setting_joint(data, bob, x, gamma, rho, cfg.subproblem_tol);
  }
  const auto pr = profile_efficiency(data, bob, x, gamma, rho, {kMinEps, 1.0 - std::abs(gamma)}, 1e-7);
  solves += 40;
  return SettingFit{pr.eps_hat, pr.plus, pr.logL};
}

// Steps 3-5 of the see-saw, starting from an M2 iterate with gamma = 0.
Iterate seesaw_m3(const CountTensor& data, const MeasurementSet& bob, const FitConfig& cfg, Iterate it,
                  std::vector<std::pair<int, double>>& trace, bool& converged, int& outer_done) {
  const Index m = data.alice_settings();
  const double gamma_cap = 1.0 - 1e-9;
  std::vector<double> moved(static_cast<std::size_t>(m), cfg.delta_init);
  std::vector<int> last_dir(static_cast<std::size_t>(m), 0);
  trace.emplace_back(0, it.logL);
  converged = false;

  for (int k = 1; k <= cfg.max_outer; ++k) {
    outer_done = k;
    const double start = it.logL;

    auto sub = convex_mle_subproblem(data, bob, it.params, std::nullopt, std::nullopt, cfg.subproblem_tol);
    ++it.solves;
    if (sub.logL > it.logL) {
      it.state = std::move(sub.state);
      it.logL = sub.logL;
    }

    if (min_eigenvalue(it.state.rho) > kRhoFloor) {
      for (Index x = 0; x < m; ++x) {
        const auto ux = static_cast<std::size_t>(x);
        if (data.setting_total(x) == 0) continue;
        const HermitianOp& rho = it.state.rho;
        double cur = setting_ll(data, bob, x, observed_setting(rho, it.state.plus[ux], it.params.eps[ux],
                                                                it.params.gamma[ux]));
        auto accept = [&](const SettingFit& f, double g) {
          const double gain = f.logL - cur;
          it.params.eps[ux] = f.eps;
          it.params.gamma[ux] = g;
          it.state.plus[ux] = f.plus;
          it.logL += gain;
          cur = f.logL;
        };
        const double gamma_before = it.params.gamma[ux];

        const SettingFit here = inner_fit(data, bob, x, it.params.gamma[ux], rho, cfg, it.solves);
        if (here.logL > cur) accept(here, it.params.gamma[ux]);

        // Start the step from the size of the previous outer move.
        double d = k == 1 ? cfg.delta_init
                          : std::clamp(2.0 * moved[ux], 16.0 * cfg.delta_min, cfg.delta_init);
        for (int j = 0; j < cfg.max_inner && d >= cfg.delta_min; ++j) {
          const double g = it.params.gamma[ux];
          const double gp = std::min(g + d, gamma_cap);
          const double gm = std::max(g - d, -gamma_cap);
          const SettingFit fp = inner_fit(data, bob, x, gp, rho, cfg, it.solves);
          const SettingFit fm = inner_fit(data, bob, x, gm, rho, cfg, it.solves);
          const bool plus_wins = fp.logL >= fm.logL;
          const SettingFit& best = plus_wins ? fp : fm;
          if (best.logL > cur) {
            const int dir = plus_wins ? 1 : -1;
            accept(best, plus_wins ? gp : gm);
            if (dir == last_dir[ux]) d *= cfg.delta_grow;
            last_dir[ux] = dir;
          } else {
            // Ties with the current point keep gamma and shrink the step.
            d *= cfg.delta_shrink;
            last_dir[ux] = 0;
          }
        }
        moved[ux] = std::abs(it.params.gamma[ux] - gamma_before);
      }
      // Re-evaluate exactly to avoid drift from accumulated gains.
      it.logL = log_likelihood(data, observed_assemblage(it.state, it.params), bob);
    }

    trace.emplace_back(k, it.logL);
    if (it.logL - start < cfg.outer_tol) {
      converged = true;
      break;
    }
  }
  return it;
}

FitResult package(ModelId model, const CountTensor& data, const MeasurementSet& bob, const Iterate& it,
                  std::vector<std::pair<int, double>> trace, bool converged, int outer) {
  FitResult r;
  r.model = model;
  Assemblage a = observed_assemblage(it.state, it.params);
  r.diagnostics = diagnose(a, it.params);
  r.diagnostics.outer_iterations = outer;
  r.diagnostics.subproblem_solves = it.solves;
  r.assemblage_hat = std::move(a);
  r.rho_B_hat = it.state.rho;
  r.params_hat = it.params;
  r.logL = it.logL;
  r.n = data.total();
  r.trace = std::move(trace);
  r.converged = converged;
  finish(r, data.alice_settings(), bob.dim(), data.bob_settings());
  return r;
}

}  // namespace

void FitConfig::validate() const {
  if (!(outer_tol > 0.0 && inner_tol > 0.0 && subproblem_tol > 0.0 && delta_init > 0.0 && delta_min > 0.0))
    throw std::invalid_argument("FitConfig: tolerances and steps must be positive");
  if (!(delta_shrink > 0.0 && delta_shrink < 1.0)) throw std::invalid_argument("FitConfig: delta_shrink must lie in (0, 1)");
  if (!(delta_grow > 1.0)) throw std::invalid_argument("FitConfig: delta_grow must exceed 1");
  if (max_outer < 1 || max_inner < 0) throw std::invalid_argument("FitConfig: iteration caps must be positive");
}

Assemblage observed_assemblage(const LosslessState& state, const LossParams& params) {
  if (static_cast<Index>(state.plus.size()) != params.settings())
    throw std::invalid_argument("observed_assemblage: parameter count does not match settings");
  std::vector<std::vector<HermitianOp>> el;
  for (std::size_t x = 0; x < state.plus.size(); ++x)
    el.push_back(observed_setting(state.rho, state.plus[x], params.eps[x], params.gamma[x]));
  return Assemblage::unchecked(std::move(el));
}

double setting_log_likelihood(const CountTensor& data, const Assemblage& model, const MeasurementSet& bob, Index x) {
  if (x < 0 || x >= data.alice_settings() || model.settings() != data.alice_settings() ||
      model.outcomes() != data.alice_outcomes())
    throw std::invalid_argument("setting_log_likelihood: shape mismatch");
  return setting_ll(data, bob, x, model.elements()[static_cast<std::size_t>(x)]);
}

SubproblemResult convex_mle_subproblem(const CountTensor& data, const MeasurementSet& bob,
                                       const LossParams& fixed_params, const std::optional<HermitianOp>& rho_fixed,
                                       std::optional<Index> setting_filter, double tol, const LosslessState* base) {
  check_shape(data, bob);
  fixed_params.validate(1e-12);
  const Index m = data.alice_settings();
  const Index d = bob.dim();
  if (fixed_params.settings() != m) throw std::invalid_argument("convex_mle_subproblem: parameter count mismatch");
  if (setting_filter && (*setting_filter < 0 || *setting_filter >= m))
    throw std::invalid_argument("convex_mle_subproblem: setting filter out of range");
  if (setting_filter && !rho_fixed)
    throw std::invalid_argument("convex_mle_subproblem: a setting filter requires a fixed rho_B");
  if (rho_fixed) {
    if (rho_fixed->rows() != d || !is_psd(*rho_fixed, 1e-9) || std::abs(trace_real(*rho_fixed) - 1.0) > 1e-8)
      throw std::invalid_argument("convex_mle_subproblem: rho_fixed must be a density operator");
    if (min_eigenvalue(*rho_fixed) <= 0.0)
      throw std::domain_error("convex_mle_subproblem: rho_fixed is singular");
  }
  if (base && (static_cast<Index>(base->plus.size()) != m))
    throw std::invalid_argument("convex_mle_subproblem: base state has the wrong number of settings");

  const auto full = hermitian_basis(d);
  const auto traceless = traceless_basis(d);
  const Index nr = rho_fixed ? 0 : static_cast<Index>(traceless.size());
  const Index q = static_cast<Index>(full.size());
  const HermitianOp rho0 = rho_fixed ? *rho_fixed : HermitianOp(identity(d) / static_cast<double>(d));

  std::vector<Index> free_settings;
  for (Index x = 0; x < m; ++x)
    if (!setting_filter || *setting_filter == x) free_settings.push_back(x);
  auto s_offset = [&](std::size_t j) { return nr + static_cast<Index>(j) * q; };

  conic::BarrierProblem bp;
  bp.num_vars = nr + static_cast<Index>(free_settings.size()) * q;
  bool infeasible = false;
  for (std::size_t j = 0; j < free_settings.size(); ++j) {
    const Index x = free_settings[j];
    const auto ux = static_cast<std::size_t>(x);
    const auto maps = outcome_maps(fixed_params.eps[ux], fixed_params.gamma[ux]);
    for (Index a = 0; a < 3; ++a)
      for (Index y = 0; y < data.bob_settings(); ++y)
        for (Index b = 0; b < data.bob_outcomes(); ++b) {
          const auto n = data(x, a, y, b);
          if (n == 0) continue;
          const HermitianOp& e = bob(b, y);
          const Mix mx = maps[static_cast<std::size_t>(a)];
          conic::LogTerm t;
          t.weight = static_cast<double>(n);
          t.constant = mx.alpha * trace_product(e, rho0);
          for (Index k = 0; k < nr; ++k)
            add_term(t, k, mx.alpha * trace_product(e, traceless[static_cast<std::size_t>(k)]));
          for (Index k = 0; k < q; ++k)
            add_term(t, s_offset(j) + k, mx.beta * trace_product(e, full[static_cast<std::size_t>(k)]));
          if (t.coeffs.empty()) {
            if (!(t.constant > 0.0)) infeasible = true;
            continue;
          }
          bp.log_terms.push_back(std::move(t));
        }
    conic::AffineHermitian lower{HermitianOp::Zero(d, d), {}};
    conic::AffineHermitian upper{rho0, {}};
    for (Index k = 0; k < nr; ++k) upper.terms.emplace_back(k, traceless[static_cast<std::size_t>(k)]);
    for (Index k = 0; k < q; ++k) {
      lower.terms.emplace_back(s_offset(j) + k, full[static_cast<std::size_t>(k)]);
      upper.terms.emplace_back(s_offset(j) + k, HermitianOp(-full[static_cast<std::size_t>(k)]));
    }
    bp.lmis.push_back(std::move(lower));
    bp.lmis.push_back(std::move(upper));
  }

  Eigen::VectorXd start = Eigen::VectorXd::Zero(bp.num_vars);
  const Eigen::VectorXd half = coordinates(HermitianOp(rho0 / 2.0), full);
  for (std::size_t j = 0; j < free_settings.size(); ++j) start.segment(s_offset(j), q) = half;

  LosslessState state;
  state.rho = rho0;
  for (Index x = 0; x < m; ++x)
    state.plus.push_back(base ? base->plus[static_cast<std::size_t>(x)] : HermitianOp(rho0 / 2.0));

  SubproblemResult out;
  if (infeasible) {
    for (const Index x : free_settings) state.plus[static_cast<std::size_t>(x)] = rho0 / 2.0;
    out.assemblage = observed_assemblage(state, fixed_params);
    out.state = std::move(state);
    out.logL = kNegInf;
    out.gap = 0.0;
    return out;
  }

  double gap = 0.0;
  if (bp.num_vars > 0 && !bp.lmis.empty()) {
    const conic::BarrierSolver solver(bp);
    conic::BarrierOptions opts;
    opts.gap_tol = tol;
    opts.relative_gap = true;
    const auto res = solver.maximize(start, opts);
    if (!res.converged) {
      throw SolverFailure("convex_mle_subproblem: barrier method did not certify the gap (" +
                              std::to_string(res.gap) + ")",
                          res.objective);
    }
    gap = res.gap;
    if (!rho_fixed) state.rho = from_coords(res.x, 0, traceless, rho0);
    for (std::size_t j = 0; j < free_settings.size(); ++j)
      state.plus[static_cast<std::size_t>(free_settings[j])] =
          from_coords(res.x, s_offset(j), full, HermitianOp::Zero(d, d));
  }
  out.assemblage = observed_assemblage(state, fixed_params);
  out.logL = log_likelihood(data, out.assemblage, bob);
  out.state = std::move(state);
  out.gap = gap;
  return out;
}

SettingFit fit_setting_joint(const CountTensor& data, const MeasurementSet& bob, Index x, double gamma_x,
                             const HermitianOp& rho, double tol) {
  check_shape(data, bob);
  if (x < 0 || x >= data.alice_settings()) throw std::invalid_argument("fit_setting_joint: setting out of range");
  if (!(std::abs(gamma_x) < 1.0)) throw std::invalid_argument("fit_setting_joint: |gamma| must be below 1");
  if (!(min_eigenvalue(rho) > 0.0)) throw std::domain_error("fit_setting_joint: rho_B is singular");
  const Index d = bob.dim();
  const auto full = hermitian_basis(d);
  const Index q = static_cast<Index>(full.size());
  const auto f = offset(gamma_x);
  const double cap = 1.0 - std::abs(gamma_x);

  // Variable 0 is eps_x, variables 1..q the coordinates of S_x.
  conic::BarrierProblem bp;
  bp.num_vars = 1 + q;
  double n_plus = 0.0, n_minus = 0.0;
  for (Index a = 0; a < 3; ++a)
    for (Index y = 0; y < data.bob_settings(); ++y)
      for (Index b = 0; b < data.bob_outcomes(); ++b) {
        const auto n = data(x, a, y, b);
        if (n == 0) continue;
        const HermitianOp& e = bob(b, y);
        const double er = trace_product(e, rho);
        conic::LogTerm t;
        t.weight = static_cast<double>(n);
        if (a == kPlus) {
          n_plus += t.weight;
          for (Index k = 0; k < q; ++k) add_term(t, 1 + k, trace_product(e, full[static_cast<std::size_t>(k)]));
        } else if (a == kMinus) {
          n_minus += t.weight;
          t.constant = er;
          for (Index k = 0; k < q; ++k) add_term(t, 1 + k, -trace_product(e, full[static_cast<std::size_t>(k)]));
        } else {
          // (1 - eps - f_-) Tr(E rho) - gamma Tr(E S)
          t.constant = (1.0 - f.minus) * er;
          add_term(t, 0, -er);
          for (Index k = 0; k < q; ++k)
            add_term(t, 1 + k, -gamma_x * trace_product(e, full[static_cast<std::size_t>(k)]));
        }
        if (t.coeffs.empty()) continue;
        bp.log_terms.push_back(std::move(t));
      }
  if (n_plus > 0.0) bp.log_terms.push_back(conic::LogTerm{n_plus, f.plus, {{0, 1.0}}});
  if (n_minus > 0.0) bp.log_terms.push_back(conic::LogTerm{n_minus, f.minus, {{0, 1.0}}});

  conic::AffineHermitian lower{HermitianOp::Zero(d, d), {}};
  conic::AffineHermitian upper{rho, {}};
  for (Index k = 0; k < q; ++k) {
    lower.terms.emplace_back(1 + k, full[static_cast<std::size_t>(k)]);
    upper.terms.emplace_back(1 + k, HermitianOp(-full[static_cast<std::size_t>(k)]));
  }
  bp.lmis.push_back(std::move(lower));
  bp.lmis.push_back(std::move(upper));
  bp.lmis.push_back(conic::AffineHermitian{HermitianOp::Zero(1, 1), {{0, HermitianOp::Ones(1, 1)}}});
  bp.lmis.push_back(conic::AffineHermitian{HermitianOp::Constant(1, 1, cap), {{0, HermitianOp::Constant(1, 1, -1.0)}}});

  Eigen::VectorXd start(1 + q);
  start(0) = cap / 2.0;
  start.tail(q) = coordinates(HermitianOp(rho / 2.0), full);

  const conic::BarrierSolver solver(bp);
  conic::BarrierOptions opts;
  opts.gap_tol = tol;
  opts.relative_gap = true;
  const auto res = solver.maximize(start, opts);
  if (!res.converged)
    throw SolverFailure("fit_setting_joint: barrier method did not certify the gap", res.objective);

  SettingFit out;
  out.eps = std::clamp(res.x(0), kMinEps, cap);
  out.plus = from_coords(res.x, 1, full, HermitianOp::Zero(d, d));
  out.logL = setting_ll(data, bob, x, observed_setting(rho, out.plus, out.eps, gamma_x));
  return out;
}

ProfileResult profile_efficiency(const CountTensor& data, const MeasurementSet& bob, Index setting, double gamma_x,
                                 const HermitianOp& rho_fixed, std::pair<double, double> bracket, double tol) {
  check_shape(data, bob);
  auto [lo, hi] = bracket;
  if (!(lo > 0.0 && lo < hi && hi <= 1.0 - std::abs(gamma_x) + 1e-12))
    throw std::invalid_argument("profile_efficiency: empty or invalid bracket");
  if (!(tol > 0.0)) throw std::invalid_argument("profile_efficiency: tolerance must be positive");
  const Index m = data.alice_settings();
  hi = std::min(hi, 1.0 - std::abs(gamma_x));

  ProfileResult best;
  best.logL = kNegInf;
  auto probe = [&](double eps) {
    LossParams p = LossParams::uniform(m, 1.0);
    p.eps[static_cast<std::size_t>(setting)] = eps;
    p.gamma[static_cast<std::size_t>(setting)] = gamma_x;
    const auto sub = convex_mle_subproblem(data, bob, p, rho_fixed, setting, 1e-9);
    const auto& el = sub.assemblage.elements()[static_cast<std::size_t>(setting)];
    const double ll = setting_ll(data, bob, setting, el);
    if (ll > best.logL || best.elements.empty()) {
      best.eps_hat = eps;
      best.logL = ll;
      best.plus = sub.state.plus[static_cast<std::size_t>(setting)];
      best.elements = el;
    }
    return ll;
  };

  probe(lo);
  probe(hi);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a), e = a + invphi * (b - a);
  double fc = probe(c), fe = probe(e);
  while (b - a > tol) {
    if (fc >= fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - invphi * (b - a);
      fc = probe(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + invphi * (b - a);
      fe = probe(e);
    }
  }
  return best;
}

FitResult fit_m0(const CountTensor& data) {
  FitResult r;
  r.model = ModelId::M0;
  r.n = data.total();
  r.frequencies.assign(static_cast<std::size_t>(data.cells()), 0.0);
  std::size_t idx = 0;
  for (Index x = 0; x < data.alice_settings(); ++x)
    for (Index a = 0; a < data.alice_outcomes(); ++a)
      for (Index y = 0; y < data.bob_settings(); ++y)
        for (Index b = 0; b < data.bob_outcomes(); ++b, ++idx) {
          const auto block = data.block_total(x, y);
          if (block > 0) r.frequencies[idx] = static_cast<double>(data(x, a, y, b)) / static_cast<double>(block);
        }
  r.logL = empirical_log_likelihood(data);
  r.trace.emplace_back(0, r.logL);
  r.converged = true;
  finish(r, data.alice_settings(), 2, data.bob_settings());
  return r;
}

FitResult fit(const CountTensor& data, const MeasurementSet& bob, const FitConfig& cfg) {
  return fit_models(data, bob, {cfg.model}, cfg).front();
}

std::vector<FitResult> fit_models(const CountTensor& data, const MeasurementSet& bob,
                                  const std::vector<ModelId>& models, const FitConfig& cfg) {
  cfg.validate();
  if (models.empty()) throw std::invalid_argument("fit_models: no models requested");
  const bool need_eff = std::any_of(models.begin(), models.end(), [](ModelId id) { return id != ModelId::M0; });
  if (need_eff) check_shape(data, bob);

  std::optional<Iterate> m2;
  std::vector<std::pair<int, double>> m2_trace;
  bool m2_conv = false;
  auto ensure_m2 = [&]() {
    if (!m2) m2 = fit_efficiency_model(data, bob, cfg, false, m2_trace, m2_conv);
  };

  std::vector<FitResult> out;
  for (const ModelId id : models) {
    switch (id) {
      case ModelId::M0:
        out.push_back(fit_m0(data));
        break;
      case ModelId::M1: {
        std::vector<std::pair<int, double>> tr;
        bool conv = false;
        const Iterate it = fit_efficiency_model(data, bob, cfg, true, tr, conv);
        out.push_back(package(id, data, bob, it, tr, conv, static_cast<int>(tr.size())));
        break;
      }
      case ModelId::M2:
        ensure_m2();
        out.push_back(package(id, data, bob, *m2, m2_trace, m2_conv, static_cast<int>(m2_trace.size())));
        break;
      case ModelId::M3: {
        ensure_m2();
        std::vector<std::pair<int, double>> tr;
        bool conv = false;
        int outer = 0;
        const Iterate it = seesaw_m3(data, bob, cfg, *m2, tr, conv, outer);
        out.push_back(package(id, data, bob, it, tr, conv && m2_conv, outer));
        break;
      }
    }
  }
  return out;
}

}  // namespace qat
