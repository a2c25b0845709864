// Acceptance run: one PASS/FAIL line per headline criterion. Exits 1 if any fails.
// Seeds follow the `reproduce` drivers, so figures and verdicts come from the same draws.

#include "qat/reproduce.hpp"
#include "qat/steering.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace qat;

namespace {

// Pinned tolerances.
constexpr double kFig1M3WinMin = 0.60;
constexpr double kFig2WinTarget = 0.75;
constexpr double kFig2WinBand = 0.10;
constexpr double kFig2FidelityLevel = 0.99;
constexpr double kFig2FidelityShareMin = 0.90;
constexpr double kOrderingSlack = 1e-7;
constexpr double kS3FloorAt005 = 0.99;
constexpr double kS3MonotoneSlack = 1e-12;
constexpr double kS4CeilingAt1e5 = 0.5;
constexpr double kGridOracleTol = 1e-4;
constexpr double kThresholdTol = 0.005;
constexpr double kPsdTol = 1e-7;
constexpr double kNsTol = 1e-7;
constexpr double kAscentSlack = 1e-9;
constexpr double kConcavitySlack = 1e-9;

constexpr std::uint64_t kSeed = 20240101;

const std::vector<ModelId> kAll{ModelId::M0, ModelId::M1, ModelId::M2, ModelId::M3};
const std::vector<ModelId> kLoss{ModelId::M1, ModelId::M2, ModelId::M3};

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

// Runs a criterion; an exception counts as a failure with its message.
void criterion(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto [ok, detail] = body();
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char buf[48];
    std::snprintf(buf, sizeof buf, " [%.1fs]", dt);
    report(name, ok, detail + buf);
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

std::string num(double v, int prec = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

int grid_index(double eta) {
  const auto g = repro::eta_grid();
  return static_cast<int>(std::find(g.begin(), g.end(), eta) - g.begin());
}

MonteCarloOptions mc(bool steering, bool fidelity) {
  MonteCarloOptions o;
  o.steering = steering;
  o.fidelity = fidelity;
  return o;
}

// Share of successful trials where any of `models` has delta AIC exactly 0.
double any_wins(const MonteCarloResult& r, const std::vector<ModelId>& models) {
  int wins = 0, total = 0;
  for (int t = 0; t < r.trials; ++t) {
    bool ok = true, won = false;
    for (const auto& rec : r.records) {
      if (rec.trial != t) continue;
      ok = ok && rec.ok;
      if (rec.ok && rec.delta_aic == 0.0 && std::find(models.begin(), models.end(), rec.model) != models.end())
        won = true;
    }
    if (!ok) continue;
    ++total;
    wins += won;
  }
  return total ? static_cast<double>(wins) / total : 0.0;
}

// Expected counts of an observed assemblage, spread evenly over (x, y).
CountTensor expected(const Assemblage& a, const MeasurementSet& bob, double n_total) {
  CountTensor c(a.settings(), a.outcomes(), bob.settings(), bob.outcomes());
  const double per = n_total / static_cast<double>(a.settings() * bob.settings());
  for (Index x = 0; x < a.settings(); ++x)
    for (Index k = 0; k < a.outcomes(); ++k)
      for (Index y = 0; y < bob.settings(); ++y)
        for (Index b = 0; b < bob.outcomes(); ++b)
          c.set(x, k, y, b, std::llround(per * trace_product(bob(b, y), a(k, x))));
  return c;
}

struct CorpusEntry {
  std::string label;
  CountTensor counts;
  MeasurementSet bob;
};

// Regression corpus: simulated datasets spanning both state families, bias, dark counts and sizes.
std::vector<CorpusEntry> regression_corpus() {
  std::vector<CorpusEntry> out;
  int k = 0;
  for (StateKind kind : {StateKind::Isotropic, StateKind::Ginibre})
    for (double eta : {0.0, 0.01, 0.2, 1.0})
      for (double s : {0.0, 0.03})
        for (std::int64_t n : {std::int64_t{3000}, std::int64_t{100000}}) {
          SimConfig cfg = kind == StateKind::Isotropic ? repro::isotropic_scenario(eta, s, 0)
                                                       : repro::ginibre_scenario(0);
          cfg.eta = eta;
          cfg.eps_sd = s;
          cfg.n_total = n;
          cfg.seed = repro::point_seed(kSeed, 500 + k++);
          Rng rng(cfg.seed);
          const auto truth = make_ground_truth(cfg, rng);
          out.push_back({(kind == StateKind::Isotropic ? "iso" : "gin") + std::string(" eta=") + num(eta) +
                             " s=" + num(s) + " n=" + std::to_string(n),
                         generate_counts(truth, truth.bob_actual, cfg, rng), truth.bob_ideal});
        }
  return out;
}

double total_log_likelihood(const CountTensor& c, const Assemblage& a, const MeasurementSet& bob) {
  double s = 0.0;
  for (Index x = 0; x < a.settings(); ++x) s += setting_log_likelihood(c, a, bob, x);
  return s;
}

}  // namespace

int main() {
  const auto grid = repro::eta_grid();

  criterion("selection sweep at eta=0.2, s=0.03", [&] {
    const auto cfg = repro::isotropic_scenario(0.2, 0.03, repro::point_seed(kSeed, 14 + grid_index(0.2)));
    const auto r = run_monte_carlo(cfg, 100, kAll, mc(false, false));
    const double w3 = r.win_fraction(ModelId::M3), w0 = r.win_fraction(ModelId::M0);
    return std::pair{w3 >= kFig1M3WinMin && w0 == 0.0,
                     "M3 wins " + num(w3) + " (need >= " + num(kFig1M3WinMin) + "), M0 wins " + num(w0)};
  });

  criterion("selection sweep at eta<=0.005, s=0", [&] {
    bool ok = true;
    std::string detail;
    for (double eta : grid) {
      if (eta > 0.005) break;
      const auto cfg = repro::isotropic_scenario(eta, 0.0, repro::point_seed(kSeed, grid_index(eta)));
      const auto r = run_monte_carlo(cfg, 100, kAll, mc(false, false));
      const double w = any_wins(r, {ModelId::M1, ModelId::M2});
      ok = ok && w > 0.5;
      detail += "eta=" + num(eta, 3) + " M1|M2 wins " + num(w) + "; ";
    }
    return std::pair{ok, detail + "need > 0.5 each"};
  });

  criterion("random-state study, 500 Ginibre states", [&] {
    const auto r = run_monte_carlo(repro::ginibre_scenario(repro::point_seed(kSeed, 0)), 500, kAll, mc(false, true));
    const double w3 = r.win_fraction(ModelId::M3);
    int hi = 0, n = 0;
    for (const auto& rec : r.records)
      if (rec.ok && rec.model == ModelId::M3 && std::isfinite(rec.fidelity)) {
        ++n;
        hi += rec.fidelity > kFig2FidelityLevel;
      }
    const double share = n ? static_cast<double>(hi) / n : 0.0;
    const bool ok = std::abs(w3 - kFig2WinTarget) <= kFig2WinBand && share >= kFig2FidelityShareMin;
    return std::pair{ok, "M3 wins " + num(w3) + " (need " + num(kFig2WinTarget) + " +/- " + num(kFig2WinBand) +
                             "), M3 fidelity > 0.99 in " + num(share) + " (need >= " + num(kFig2FidelityShareMin) +
                             "), failed trials " + std::to_string(r.failed_trials)};
  });

  criterion("steering-weight bias", [&] {
    bool m3_ok = true, mono_ok = true;
    std::string m3_detail, bias_detail;
    std::vector<double> prev_bias(2, -1e300);
    int point = 0;
    for (double eta : grid) {
      const auto cfg = repro::isotropic_scenario(eta, 0.03, repro::point_seed(kSeed, 100 + point++));
      const auto r = run_monte_carlo(cfg, 100, kLoss, mc(true, false));
      const auto truth = r.summarize(ModelId::M3, &TrialRecord::true_weight);
      if (eta <= 0.2 + 1e-12) {
        const auto w = r.summarize(ModelId::M3, &TrialRecord::steering_weight);
        const double pooled = std::sqrt(0.5 * (w.sd * w.sd + truth.sd * truth.sd));
        const double dev = std::abs(w.mean - truth.mean);
        if (dev > pooled) {
          m3_ok = false;
          m3_detail += " eta=" + num(eta, 3) + " |dev|=" + num(dev) + " > sd " + num(pooled);
        }
      }
      if (eta >= 0.05) {
        bias_detail += " eta=" + num(eta, 3) + ":";
        for (int i = 0; i < 2; ++i) {
          const double bias = truth.mean - r.summarize(kLoss[static_cast<std::size_t>(i)],
                                                       &TrialRecord::steering_weight).mean;
          bias_detail += " " + num(bias, 3);
          if (bias <= 0.0 || bias < prev_bias[static_cast<std::size_t>(i)]) mono_ok = false;
          prev_bias[static_cast<std::size_t>(i)] = bias;
        }
      }
    }
    return std::pair{m3_ok && mono_ok, std::string("M3 within pooled sd for eta<=0.2: ") +
                                           (m3_ok ? "yes" : "no" + m3_detail) +
                                           "; M1/M2 underestimate (truth - mean):" + bias_detail};
  });

  // The corpus fits feed both the ordering and the property criteria.
  std::vector<std::vector<FitResult>> corpus_fits;
  std::vector<CorpusEntry> corpus;
  criterion("likelihood ordering on the regression corpus", [&] {
    corpus = regression_corpus();
    double worst = 0.0;
    std::string where;
    for (const auto& e : corpus) {
      corpus_fits.push_back(fit_models(e.counts, e.bob, kAll, {}));
      const auto& f = corpus_fits.back();
      for (auto [hi, lo] : {std::pair{0, 3}, std::pair{3, 2}, std::pair{2, 1}}) {
        const double v = f[static_cast<std::size_t>(lo)].logL - f[static_cast<std::size_t>(hi)].logL;
        if (v > worst) {
          worst = v;
          where = " at " + e.label;
        }
      }
    }
    return std::pair{worst <= kOrderingSlack, std::to_string(corpus.size()) + " datasets, worst violation " +
                                                  num(worst) + where + " (limit " + num(kOrderingSlack) + ")"};
  });

  criterion("fidelity insensitivity curve", [&] {
    bool mono = true;
    for (double nu : {0.25, 0.5, 0.75}) {
      double prev = 2.0;
      for (int k = 1; k <= 20; ++k) {
        const double f = repro::insensitivity_fidelity(nu, 0.05 * k);
        mono = mono && f <= prev + kS3MonotoneSlack;
        prev = f;
      }
    }
    const double f05 = repro::insensitivity_fidelity(0.5, 0.05);
    return std::pair{mono && f05 > kS3FloorAt005,
                     std::string("non-increasing in eps: ") + (mono ? "yes" : "no") + "; F(nu=0.5, eps=0.05) = " +
                         num(f05, 8)};
  });

  criterion("AICc convergence", [&] {
    const std::vector<std::int64_t> ns{1000, 10000, 100000};
    const std::vector<int> points{0, 2, 4};  // indices of these sizes in the figure driver
    std::vector<std::vector<double>> mean(4), worst(4);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      auto cfg = repro::isotropic_scenario(0.2, 0.03, repro::point_seed(kSeed, 200 + points[i]));
      cfg.n_total = ns[i];
      const auto r = run_monte_carlo(cfg, 50, kAll, mc(false, false));
      for (std::size_t m = 0; m < 4; ++m) {
        double s = 0.0, mx = 0.0;
        int c = 0;
        for (const auto& rec : r.records)
          if (rec.ok && rec.model == kAll[m] && std::isfinite(rec.delta_aicc)) {
            const double d = std::abs(rec.delta_aicc - rec.delta_aic);
            s += d;
            mx = std::max(mx, d);
            ++c;
          }
        mean[m].push_back(c ? s / c : NAN);
        worst[m].push_back(c ? mx : NAN);
      }
    }
    bool ok = true;
    std::string detail;
    for (std::size_t m = 0; m < 4; ++m) {
      detail += to_string(kAll[m]) + ":";
      for (double v : mean[m]) detail += " " + num(v, 3);
      for (std::size_t i = 1; i < ns.size(); ++i) ok = ok && mean[m][i] < mean[m][i - 1];
      ok = ok && worst[m].back() < kS4CeilingAt1e5;
      detail += " (max at 1e5 " + num(worst[m].back(), 3) + "); ";
    }
    return std::pair{ok, "mean |dAICc - dAIC| at N=1e3,1e4,1e5 " + detail};
  });

  criterion("oracle: M0 equals empirical frequencies", [&] {
    double worst = 0.0;
    for (const auto& e : corpus) {
      const auto r = fit_m0(e.counts);
      std::vector<double> tot(9, 0.0);
      for (Index x = 0; x < 3; ++x)
        for (Index y = 0; y < 3; ++y)
          for (Index a = 0; a < 3; ++a)
            for (Index b = 0; b < 2; ++b) tot[static_cast<std::size_t>(x * 3 + y)] += e.counts(x, a, y, b);
      for (Index x = 0; x < 3; ++x)
        for (Index a = 0; a < 3; ++a)
          for (Index y = 0; y < 3; ++y)
            for (Index b = 0; b < 2; ++b) {
              const double t = tot[static_cast<std::size_t>(x * 3 + y)];
              const double want = t > 0 ? e.counts(x, a, y, b) / t : 0.0;
              const double got = r.frequencies[static_cast<std::size_t>(((x * 3 + a) * 3 + y) * 2 + b)];
              worst = std::max(worst, std::abs(got - want));
            }
    }
    return std::pair{worst == 0.0, "max |frequency - count/total| = " + num(worst) + " over " +
                                       std::to_string(corpus.size()) + " datasets"};
  });

  criterion("oracle: see-saw vs brute-force grid on one-setting toys", [&] {
    const auto bob = pauli_measurements();
    const MeasurementSet z({bob.elements()[2]});
    double worst = 0.0;
    for (int t = 0; t < 3; ++t) {
      Rng rng(repro::point_seed(kSeed, 700 + t));
      const double e0 = 0.6 + 0.1 * t, g0 = -0.05 + 0.05 * t;
      const Assemblage ideal = steer(sample_ginibre_state(4, rng), z, 2, 2);
      const CountTensor c = expected(observed_elements(ideal, LossParams{{e0}, {g0}}), bob, 1e6);
      double best = -1e300;
      for (int i = -4; i <= 4; ++i)
        for (int j = -4; j <= 4; ++j) {
          const LossParams p{{e0 + 0.025 * i}, {g0 + 0.025 * j}};
          if (!p.valid(0.0)) continue;
          best = std::max(best, convex_mle_subproblem(c, bob, p).logL);
        }
      FitConfig cfg;
      cfg.model = ModelId::M3;
      worst = std::max(worst, std::abs(fit(c, bob, cfg).logL - best));
    }
    return std::pair{worst < kGridOracleTol, "max |logL_fit - logL_grid| = " + num(worst) + " over 3 toys"};
  });

  criterion("oracle: steering threshold of the isotropic family", [&] {
    double lo = 0.3, hi = 0.9;
    while (hi - lo > 1e-4) {
      const double mid = 0.5 * (lo + hi);
      const auto a = steer(isotropic_state(mid), pauli_measurements(), 2, 2);
      (steering_weight(a).weight > 1e-6 ? hi : lo) = mid;
    }
    const double nu = 0.5 * (lo + hi);
    return std::pair{std::abs(nu - 1.0 / std::sqrt(3.0)) < kThresholdTol,
                     "bisected threshold " + num(nu, 6) + " vs 1/sqrt(3) = " + num(1.0 / std::sqrt(3.0), 6)};
  });

  criterion("properties: PSD, no-signalling, bounds, ascent, concavity", [&] {
    int bad_psd = 0, bad_ns = 0, bad_bounds = 0, bad_trace = 0, bad_concave = 0, checked = 0;
    Rng rng(repro::point_seed(kSeed, 800));
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (std::size_t d = 0; d < corpus_fits.size(); ++d) {
      for (std::size_t m = 1; m < 4; ++m) {
        const auto& f = corpus_fits[d][m];
        ++checked;
        if (!f.assemblage_hat || f.diagnostics.min_eigenvalue < -kPsdTol) ++bad_psd;
        if (f.diagnostics.ns_defect > kNsTol) ++bad_ns;
        if (f.diagnostics.bound_violation > 0.0 || !f.params_hat.valid(0.0)) ++bad_bounds;
        for (std::size_t i = 1; i < f.trace.size(); ++i)
          if (f.trace[i].second < f.trace[i - 1].second - kAscentSlack) {
            ++bad_trace;
            break;
          }
      }
      // Log-likelihood is concave along segments between fitted assemblages.
      const auto& e = corpus[d];
      const Assemblage& a = *corpus_fits[d][1].assemblage_hat;
      const Assemblage& b = *corpus_fits[d][3].assemblage_hat;
      const double t = u(rng);
      const double mid = total_log_likelihood(e.counts, mix(a, b, t), e.bob);
      const double chord = t * total_log_likelihood(e.counts, a, e.bob) +
                           (1 - t) * total_log_likelihood(e.counts, b, e.bob);
      if (mid < chord - kConcavitySlack * std::max(1.0, std::abs(chord))) ++bad_concave;
    }
    const bool ok = checked > 0 && bad_psd + bad_ns + bad_bounds + bad_trace + bad_concave == 0;
    return std::pair{ok, std::to_string(checked) + " fits: psd " + std::to_string(bad_psd) + ", ns " +
                             std::to_string(bad_ns) + ", bounds " + std::to_string(bad_bounds) + ", ascent " +
                             std::to_string(bad_trace) + ", concavity " + std::to_string(bad_concave) +
                             " violations"};
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
