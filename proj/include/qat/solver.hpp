#ifndef QAT_SOLVER_HPP
#define QAT_SOLVER_HPP

// Maximum-likelihood assemblage fits under the loss models M0-M3.
//
// Every fit is parametrized by Bob's reduced state rho_B and the lossless
// "+" elements S_x (0 <= S_x <= rho_B). The observed elements are
//   s~_{+|x} = c_+ S_x,  s~_{-|x} = c_- (rho_B - S_x),  s~_{0|x} = rho_B - s~_{+|x} - s~_{-|x}
// with c_+- = eps_x + f_+-(gamma_x). For fixed (eps, gamma) the problem is a
// concave program over PSD variables; the loss parameters are updated by
// alternating (see-saw) steps.

#include "qat/assemblage.hpp"
#include "qat/infocrit.hpp"
#include "qat/lossmodel.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qat {

/// How the per-setting (eps_x, S_x) update with gamma_x and rho_B fixed is solved.
enum class InnerSolve {
  Joint,    // one concave program in (eps_x, S_x)
  Profile,  // golden-section search over eps_x with a convex solve per probe
};

struct FitConfig {
  ModelId model = ModelId::M3;
  double outer_tol = 1e-6;
  double inner_tol = 1e-7;
  double delta_init = 0.01;
  double delta_shrink = 0.5;
  double delta_grow = 1.6;
  int max_outer = 200;
  int max_inner = 50;
  double subproblem_tol = 1e-8;
  std::uint64_t seed = 0;
  InnerSolve inner_solve = InnerSolve::Joint;
  /// Inner gamma search stops once the step falls below this.
  double delta_min = 1e-6;

  /// Throws std::invalid_argument on non-positive tolerances or bad step factors.
  void validate() const;
};

/// rho_B and the lossless "+" elements S_x.
struct LosslessState {
  HermitianOp rho;
  std::vector<HermitianOp> plus;
};

/// Observed three-outcome assemblage of a lossless state under given loss parameters.
Assemblage observed_assemblage(const LosslessState& state, const LossParams& params);

struct FitDiagnostics {
  double ns_defect = 0.0;
  double min_eigenvalue = 0.0;   // smallest eigenvalue over all observed elements
  double bound_violation = 0.0;  // max(0, |gamma_x| - (1 - eps_x))
  int outer_iterations = 0;
  int subproblem_solves = 0;
};

struct FitResult {
  ModelId model = ModelId::M3;
  std::optional<Assemblage> assemblage_hat;  // absent for M0
  HermitianOp rho_B_hat;                     // empty for M0
  LossParams params_hat;                     // empty for M0
  std::vector<double> frequencies;           // M0 only: per-cell empirical frequency, CountTensor order
  double logL = 0.0;
  double aic = 0.0;
  std::optional<double> aicc;  // absent when n <= p + 1
  int p = 0;
  std::int64_t n = 0;
  std::vector<std::pair<int, double>> trace;  // (iteration, logL)
  bool converged = false;
  FitDiagnostics diagnostics;
};

/// Raised when an inner conic solve fails to certify its gap.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double best_log_l)
      : std::runtime_error(what), best_log_l_(best_log_l) {}
  double best_log_l() const { return best_log_l_; }

 private:
  double best_log_l_;
};

struct SubproblemResult {
  Assemblage assemblage;  // observed form
  LosslessState state;
  double logL = 0.0;
  double gap = 0.0;
};

/// Maximizes the log-likelihood over rho_B and every S_x with the loss
/// parameters fixed. With `setting_filter` only S_x of that setting varies;
/// rho_B is then taken from `rho_fixed` (required) and the remaining settings
/// from `base` (default rho_B / 2). A positive count on an outcome whose
/// probability is forced to zero yields logL = -inf without a solve.
SubproblemResult convex_mle_subproblem(const CountTensor& data, const MeasurementSet& bob,
                                       const LossParams& fixed_params,
                                       const std::optional<HermitianOp>& rho_fixed = std::nullopt,
                                       std::optional<Index> setting_filter = std::nullopt,
                                       double tol = 1e-8, const LosslessState* base = nullptr);

/// Contribution of setting x to the log-likelihood.
double setting_log_likelihood(const CountTensor& data, const Assemblage& model, const MeasurementSet& bob,
                              Index x);

struct SettingFit {
  double eps = 1.0;
  HermitianOp plus;  // S_x
  double logL = 0.0;  // setting contribution
};

/// Concave joint maximization over (eps_x, S_x) for fixed gamma_x and rho_B,
/// with eps_x restricted to (0, 1 - |gamma_x|].
SettingFit fit_setting_joint(const CountTensor& data, const MeasurementSet& bob, Index x, double gamma_x,
                             const HermitianOp& rho, double tol = 1e-8);

struct ProfileResult {
  double eps_hat = 1.0;
  double logL = 0.0;  // setting contribution
  HermitianOp plus;
  std::vector<HermitianOp> elements;  // observed s~_{a|x}
};

/// Golden-section search over eps_x in `bracket`, solving for S_x at each
/// probe. Never returns a value worse than both bracket endpoints.
ProfileResult profile_efficiency(const CountTensor& data, const MeasurementSet& bob, Index setting, double gamma_x,
                                 const HermitianOp& rho_fixed, std::pair<double, double> bracket, double tol);

/// Unconstrained multinomial fit per (x, y) block.
FitResult fit_m0(const CountTensor& data);

/// Fits the model named in cfg.model.
FitResult fit(const CountTensor& data, const MeasurementSet& bob, const FitConfig& cfg);

/// Fits several models, reusing the M2 fit as the M3 starting point.
std::vector<FitResult> fit_models(const CountTensor& data, const MeasurementSet& bob,
                                  const std::vector<ModelId>& models, const FitConfig& cfg);

}  // namespace qat

#endif  // QAT_SOLVER_HPP
