#include "qat/simulator.hpp"

#include "qat/steering.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace qat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double deg(double d) { return d * std::numbers::pi / 180.0; }

// Nominal (quarter-wave, half-wave) orientations in degrees for Z, X, Y.
constexpr double kAnalyser[3][2] = {{0.0, 0.0}, {45.0, 22.5}, {45.0, 0.0}};

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

void SimConfig::validate() const {
  if (!(eps_mean > 0.0 && eps_mean <= 1.0)) throw std::invalid_argument("SimConfig: eps must lie in (0, 1]");
  if (!(eps_sd >= 0.0)) throw std::invalid_argument("SimConfig: eps_sd must be nonnegative");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("SimConfig: eta must lie in [0, 1]");
  if (n_total < 1) throw std::invalid_argument("SimConfig: n_total must be positive");
  if (!(dark_mean >= 0.0)) throw std::invalid_argument("SimConfig: dark_mean must be nonnegative");
  if (!(retardation_sd >= 0.0 && angle_sd_deg >= 0.0))
    throw std::invalid_argument("SimConfig: error magnitudes must be nonnegative");
  if (state == StateKind::Isotropic && !(nu >= 0.0 && nu <= 1.0))
    throw std::invalid_argument("SimConfig: nu must lie in [0, 1]");
  if (state == StateKind::Explicit) {
    if (rho_explicit.rows() != 4 || rho_explicit.cols() != 4)
      throw std::invalid_argument("SimConfig: explicit state must be 4 x 4");
    if (!is_hermitian(rho_explicit, 1e-10) || min_eigenvalue(rho_explicit) < -1e-9 ||
        std::abs(trace_real(rho_explicit) - 1.0) > 1e-9)
      throw std::invalid_argument("SimConfig: explicit state is not a density operator");
  }
}

HermitianOp sample_ginibre_state(Index dim, Rng& rng) {
  if (dim < 2) throw std::invalid_argument("sample_ginibre_state: dim must be at least 2");
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXcd a(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) a(i, j) = {g(rng), g(rng)};
  HermitianOp rho = a * a.adjoint();
  rho /= trace_real(rho);
  return hermitian_part(rho);
}

HermitianOp sample_ginibre_state(Index dim, std::uint64_t seed) {
  Rng rng(seed);
  return sample_ginibre_state(dim, rng);
}

double sample_norm5(double mean, double sd, Rng& rng) {
  if (sd == 0.0) return mean;
  std::normal_distribution<double> g(mean, sd);
  for (;;) {
    const double v = g(rng);
    if (std::abs(v - mean) <= 5.0 * sd) return v;
  }
}

LossParams sample_loss_params(const SimConfig& cfg, Index m, Rng& rng) {
  LossParams p = LossParams::uniform(m, cfg.eps_mean);
  for (Index x = 0; x < m; ++x) {
    const auto ux = static_cast<std::size_t>(x);
    p.eps[ux] = std::clamp(sample_norm5(cfg.eps_mean, cfg.eps_sd, rng), 1e-6, 1.0);
    p.gamma[ux] = cfg.eta * (1.0 - p.eps[ux]);
  }
  return p;
}

LossParams sample_loss_params(const SimConfig& cfg, Index m, std::uint64_t seed) {
  Rng rng(seed);
  return sample_loss_params(cfg, m, rng);
}

Eigen::Matrix2cd waveplate(double angle, double delta) {
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix2cd r;
  r << c, s, -s, c;
  Eigen::Matrix2cd phase = Eigen::Matrix2cd::Zero();
  phase(0, 0) = std::polar(1.0, -delta / 2.0);
  phase(1, 1) = std::polar(1.0, delta / 2.0);
  return r.transpose() * phase * r;
}

MeasurementSet bob_povm_with_errors(const SimConfig& cfg, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const double ret_sd = 2.0 * std::numbers::pi * cfg.retardation_sd;
  // One retardance per plate per trial; orientation errors per setting.
  const double d_quarter = std::numbers::pi / 2.0 + ret_sd * g(rng);
  const double d_half = std::numbers::pi + ret_sd * g(rng);
  std::vector<std::vector<HermitianOp>> el;
  for (const auto& set : kAnalyser) {
    const double q = deg(set[0] + cfg.angle_sd_deg * g(rng));
    const double h = deg(set[1] + cfg.angle_sd_deg * g(rng));
    const Eigen::Matrix2cd u = waveplate(h, d_half) * waveplate(q, d_quarter);
    const Eigen::Vector2cd pass = u.adjoint().col(0);
    const Eigen::Vector2cd block = u.adjoint().col(1);
    el.push_back({hermitian_part(projector(pass)), hermitian_part(projector(block))});
  }
  return MeasurementSet(std::move(el), 1e-10);
}

MeasurementSet bob_povm_with_errors(const SimConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  return bob_povm_with_errors(cfg, rng);
}

HermitianOp sample_state(const SimConfig& cfg, Rng& rng) {
  switch (cfg.state) {
    case StateKind::Isotropic: return isotropic_state(cfg.nu);
    case StateKind::Ginibre: return sample_ginibre_state(4, rng);
    case StateKind::Explicit: return cfg.rho_explicit;
  }
  throw std::invalid_argument("sample_state: unknown state kind");
}

GroundTruth make_ground_truth(const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  GroundTruth t;
  t.rho_ab = sample_state(cfg, rng);
  t.loss = sample_loss_params(cfg, 3, rng);
  t.ideal_assemblage = steer(t.rho_ab, pauli_measurements(), 2, 2);
  t.observed_assemblage = observed_elements(t.ideal_assemblage, t.loss);
  t.bob_ideal = pauli_measurements();
  if (cfg.bob_errors) {
    t.bob_actual = bob_povm_with_errors(cfg, rng);
  } else {
    t.bob_actual = t.bob_ideal;
  }
  return t;
}

std::vector<double> expected_rates(const GroundTruth& truth, const MeasurementSet& bob, const SimConfig& cfg) {
  const Assemblage& a = truth.observed_assemblage;
  const double block = static_cast<double>(cfg.n_total) / static_cast<double>(a.settings() * bob.settings());
  std::vector<double> out;
  for (Index x = 0; x < a.settings(); ++x)
    for (Index o = 0; o < a.outcomes(); ++o)
      for (Index y = 0; y < bob.settings(); ++y)
        for (Index b = 0; b < bob.outcomes(); ++b)
          out.push_back(block * std::max(0.0, trace_product(bob(b, y), a(o, x))));
  return out;
}

CountTensor generate_counts(const GroundTruth& truth, const MeasurementSet& bob, const SimConfig& cfg, Rng& rng) {
  const auto rates = expected_rates(truth, bob, cfg);
  CountTensor c(truth.observed_assemblage.settings(), truth.observed_assemblage.outcomes(), bob.settings(),
                bob.outcomes());
  std::size_t i = 0;
  for (Index x = 0; x < c.alice_settings(); ++x)
    for (Index o = 0; o < c.alice_outcomes(); ++o)
      for (Index y = 0; y < c.bob_settings(); ++y)
        for (Index b = 0; b < c.bob_outcomes(); ++b, ++i) {
          std::int64_t n = 0;
          if (rates[i] > 0.0) n += std::poisson_distribution<std::int64_t>(rates[i])(rng);
          if (cfg.dark_mean > 0.0) n += std::poisson_distribution<std::int64_t>(cfg.dark_mean)(rng);
          c.set(x, o, y, b, n);
        }
  return c;
}

CountTensor expected_counts(const GroundTruth& truth, const MeasurementSet& bob, const SimConfig& cfg) {
  const auto rates = expected_rates(truth, bob, cfg);
  CountTensor c(truth.observed_assemblage.settings(), truth.observed_assemblage.outcomes(), bob.settings(),
                bob.outcomes());
  std::size_t i = 0;
  for (Index x = 0; x < c.alice_settings(); ++x)
    for (Index o = 0; o < c.alice_outcomes(); ++o)
      for (Index y = 0; y < c.bob_settings(); ++y)
        for (Index b = 0; b < c.bob_outcomes(); ++b, ++i) c.set(x, o, y, b, std::llround(rates[i]));
  return c;
}

MetricSummary summarize_values(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double d) { return !std::isfinite(d); }), v.end());
  MetricSummary s;
  s.count = static_cast<int>(v.size());
  if (v.empty()) {
    s.median = s.q1 = s.q3 = s.mean = s.sd = kNaN;
    return s;
  }
  std::sort(v.begin(), v.end());
  // Linear interpolation between order statistics.
  auto quantile = [&](double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  s.median = quantile(0.5);
  s.q1 = quantile(0.25);
  s.q3 = quantile(0.75);
  double sum = 0.0;
  for (double d : v) sum += d;
  s.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double d : v) ss += (d - s.mean) * (d - s.mean);
  s.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return s;
}

MetricSummary MonteCarloResult::summarize(ModelId model, double TrialRecord::*metric) const {
  std::vector<double> v;
  for (const auto& r : records)
    if (r.ok && r.model == model) v.push_back(r.*metric);
  return summarize_values(std::move(v));
}

double MonteCarloResult::win_fraction(ModelId model) const {
  int wins = 0, total = 0;
  for (const auto& r : records)
    if (r.ok && r.model == model) {
      ++total;
      if (r.delta_aic == 0.0) ++wins;
    }
  return total > 0 ? static_cast<double>(wins) / total : kNaN;
}

std::vector<TrialRecord> run_trial(const SimConfig& cfg, int trial, const std::vector<ModelId>& models,
                                   const MonteCarloOptions& opts) {
  std::vector<TrialRecord> recs(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    recs[i].trial = trial;
    recs[i].model = models[i];
  }
  try {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(trial)));
    const GroundTruth truth = make_ground_truth(cfg, rng);
    const CountTensor counts = generate_counts(truth, truth.bob_actual, cfg, rng);
    const auto fits = fit_models(counts, truth.bob_ideal, models, opts.fit);
    const double true_w = opts.steering ? steering_weight(truth.observed_assemblage).weight : kNaN;

    std::vector<double> aics, aiccs;
    for (const auto& f : fits) {
      aics.push_back(f.aic);
      aiccs.push_back(f.aicc ? *f.aicc : kNaN);
    }
    const auto daic = delta_aic(aics);
    const bool aicc_ok = std::all_of(aiccs.begin(), aiccs.end(), [](double d) { return std::isfinite(d); });
    const auto daicc = aicc_ok ? delta_aic(aiccs) : std::vector<double>(aiccs.size(), kNaN);

    for (std::size_t i = 0; i < fits.size(); ++i) {
      const auto& f = fits[i];
      auto& r = recs[i];
      r.logL = f.logL;
      r.aic = f.aic;
      r.aicc = aiccs[i];
      r.delta_aic = daic[i];
      r.delta_aicc = daicc[i];
      r.converged = f.converged;
      r.n = f.n;
      r.true_weight = true_w;
      r.fidelity = kNaN;
      r.steering_weight = kNaN;
      r.eps_mean_hat = kNaN;
      r.gamma_mean_hat = kNaN;
      if (f.assemblage_hat) {
        if (opts.fidelity) r.fidelity = assemblage_fidelity(*f.assemblage_hat, truth.observed_assemblage);
        if (opts.steering) r.steering_weight = steering_weight(*f.assemblage_hat).weight;
        double es = 0.0, gs = 0.0;
        for (std::size_t x = 0; x < f.params_hat.eps.size(); ++x) {
          es += f.params_hat.eps[x];
          gs += f.params_hat.gamma[x];
        }
        r.eps_mean_hat = es / static_cast<double>(f.params_hat.eps.size());
        r.gamma_mean_hat = gs / static_cast<double>(f.params_hat.eps.size());
      }
      r.ok = true;
    }
  } catch (const std::exception& e) {
    for (auto& r : recs) {
      r.ok = false;
      r.error = e.what();
    }
  }
  return recs;
}

MonteCarloResult run_monte_carlo(const SimConfig& cfg, int trials, const std::vector<ModelId>& models,
                                 const MonteCarloOptions& opts) {
  if (trials < 1) throw std::invalid_argument("run_monte_carlo: trials must be positive");
  if (models.empty()) throw std::invalid_argument("run_monte_carlo: no models");
  cfg.validate();
  opts.fit.validate();

  std::vector<std::vector<TrialRecord>> per_trial(static_cast<std::size_t>(trials));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int t = next++; t < trials; t = next++) per_trial[static_cast<std::size_t>(t)] = run_trial(cfg, t, models, opts);
  };
  const int jobs = std::max(1, std::min(opts.jobs, trials));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  MonteCarloResult res;
  res.models = models;
  res.trials = trials;
  for (auto& recs : per_trial) {
    if (!recs.empty() && !recs.front().ok) ++res.failed_trials;
    for (auto& r : recs) res.records.push_back(std::move(r));
  }
  if (res.failure_rate() > 0.01)
    throw std::runtime_error("run_monte_carlo: " + std::to_string(res.failed_trials) + " of " +
                             std::to_string(trials) + " trials failed");
  return res;
}

}  // namespace qat
