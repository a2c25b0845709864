#ifndef QAT_SIMULATOR_HPP
#define QAT_SIMULATOR_HPP

#include "qat/assemblage.hpp"
#include "qat/infocrit.hpp"
#include "qat/lossmodel.hpp"
#include "qat/solver.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace qat {

using Rng = std::mt19937_64;

/// Independent stream for (master seed, index); stable across thread schedules.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

enum class StateKind { Isotropic, Ginibre, Explicit };

struct SimConfig {
  StateKind state = StateKind::Isotropic;
  double nu = 0.8;            // isotropic visibility
  HermitianOp rho_explicit;   // two-qubit state for StateKind::Explicit
  double eps_mean = 0.7;
  double eps_sd = 0.0;
  double eta = 0.0;
  std::int64_t n_total = 100000;
  double dark_mean = 100.0;        // per joint-outcome cell
  double retardation_sd = 1.0 / 120.0;  // in waves
  double angle_sd_deg = 0.08;
  bool bob_errors = true;          // perturb Bob's waveplates
  std::uint64_t seed = 1;

  void validate() const;
};

struct GroundTruth {
  HermitianOp rho_ab;
  LossParams loss;
  Assemblage ideal_assemblage;     // lossless, outcomes {+, -}
  Assemblage observed_assemblage;  // outcomes {+, -, null}
  MeasurementSet bob_ideal;
  MeasurementSet bob_actual;       // what generated the counts
};

/// rho = A A^dagger / Tr(A A^dagger) with A a dim x dim complex Ginibre matrix.
HermitianOp sample_ginibre_state(Index dim, std::uint64_t seed);
HermitianOp sample_ginibre_state(Index dim, Rng& rng);

/// Gaussian restricted to [mean - 5 sd, mean + 5 sd] by rejection.
double sample_norm5(double mean, double sd, Rng& rng);

/// eps_x ~ Norm5(eps_mean, eps_sd) clipped to (0, 1]; gamma_x = eta (1 - eps_x).
LossParams sample_loss_params(const SimConfig& cfg, Index m, Rng& rng);
LossParams sample_loss_params(const SimConfig& cfg, Index m, std::uint64_t seed);

/// Jones matrix of a waveplate with fast axis at `angle` (rad) and retardance `delta` (rad).
Eigen::Matrix2cd waveplate(double angle, double delta);

/// Bob's Z, X, Y analysers (quarter-wave then half-wave plate then a polarizing
/// splitter) with retardance and orientation errors. With zero error sds the
/// elements are the Pauli eigenprojectors.
MeasurementSet bob_povm_with_errors(const SimConfig& cfg, std::uint64_t seed);
MeasurementSet bob_povm_with_errors(const SimConfig& cfg, Rng& rng);

/// Two-qubit state named by the config (Ginibre states drawn from `rng`).
HermitianOp sample_state(const SimConfig& cfg, Rng& rng);

/// State, loss draws and Bob's analysers for one trial.
GroundTruth make_ground_truth(const SimConfig& cfg, Rng& rng);

/// Expected rate per cell: N / (m m_B) * Tr(E_{b|y} s~_{a|x}).
std::vector<double> expected_rates(const GroundTruth& truth, const MeasurementSet& bob, const SimConfig& cfg);

/// Poisson signal plus Poisson dark counts per cell.
CountTensor generate_counts(const GroundTruth& truth, const MeasurementSet& bob, const SimConfig& cfg, Rng& rng);

/// Noise-free counts: expected rates rounded to the nearest integer.
CountTensor expected_counts(const GroundTruth& truth, const MeasurementSet& bob, const SimConfig& cfg);

struct TrialRecord {
  int trial = 0;
  ModelId model = ModelId::M0;
  bool ok = false;
  std::string error;
  double logL = 0.0;
  double aic = 0.0;
  double aicc = 0.0;        // NaN when undefined
  double delta_aic = 0.0;
  double delta_aicc = 0.0;
  double fidelity = 0.0;    // vs. ground-truth observed assemblage; NaN for M0
  double steering_weight = 0.0;  // NaN for M0 or when not requested
  double true_weight = 0.0;      // ground-truth observed assemblage
  double eps_mean_hat = 0.0;     // NaN for M0
  double gamma_mean_hat = 0.0;
  bool converged = false;
  std::int64_t n = 0;
};

struct MonteCarloOptions {
  int jobs = 1;
  bool steering = true;
  bool fidelity = true;
  FitConfig fit;
};

struct MetricSummary {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  int count = 0;
};

struct MonteCarloResult {
  std::vector<ModelId> models;
  std::vector<TrialRecord> records;  // trial-major, models in request order
  int trials = 0;
  int failed_trials = 0;

  double failure_rate() const { return trials > 0 ? static_cast<double>(failed_trials) / trials : 0.0; }
  /// Summary of a metric over successful trials of one model.
  MetricSummary summarize(ModelId model, double TrialRecord::*metric) const;
  /// Fraction of successful trials in which `model` has delta AIC exactly 0.
  double win_fraction(ModelId model) const;
};

/// One trial: fresh ground truth, counts and fits for every model.
std::vector<TrialRecord> run_trial(const SimConfig& cfg, int trial, const std::vector<ModelId>& models,
                                   const MonteCarloOptions& opts);

/// Runs `trials` independent trials across opts.jobs threads. Throws if more
/// than 1% of trials fail.
MonteCarloResult run_monte_carlo(const SimConfig& cfg, int trials, const std::vector<ModelId>& models,
                                 const MonteCarloOptions& opts = {});

MetricSummary summarize_values(std::vector<double> values);

}  // namespace qat

#endif  // QAT_SIMULATOR_HPP
