#include "qat/reproduce.hpp"

#include "qat/assemblage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace qat::repro {

namespace {

const std::vector<ModelId> kAllModels{ModelId::M0, ModelId::M1, ModelId::M2, ModelId::M3};
const std::vector<ModelId> kLossModels{ModelId::M1, ModelId::M2, ModelId::M3};

MonteCarloOptions mc_options(const Options& opt, bool steering, bool fidelity) {
  MonteCarloOptions mo;
  mo.jobs = opt.jobs;
  mo.steering = steering;
  mo.fidelity = fidelity;
  mo.fit = opt.fit;
  return mo;
}

std::vector<std::string> summary_row(const std::vector<std::string>& prefix, const MetricSummary& s) {
  auto row = prefix;
  for (double v : {s.median, s.q1, s.q3, s.mean, s.sd}) row.push_back(fmt(v));
  row.push_back(std::to_string(s.count));
  return row;
}

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const std::vector<std::string> kStatCols{"median", "q1", "q3", "mean", "sd", "count"};

}  // namespace

void Table::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw std::logic_error("Table::add: row width does not match header");
  rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
  return os.str();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig1", "fig2", "fig3", "figS3", "figS4"};
  return ids;
}

std::vector<double> eta_grid() {
  std::vector<double> g;
  for (int k = 0; k < 13; ++k) g.push_back(std::pow(10.0, -3.0 + 3.0 * k / 12.0));
  g.push_back(0.2);
  std::sort(g.begin(), g.end());
  return g;
}

SimConfig isotropic_scenario(double eta, double eps_sd, std::uint64_t seed) {
  SimConfig c;
  c.state = StateKind::Isotropic;
  c.nu = 0.8;
  c.eps_mean = 0.7;
  c.eps_sd = eps_sd;
  c.eta = eta;
  c.n_total = 100000;
  c.dark_mean = 0.0;
  c.bob_errors = false;
  c.seed = seed;
  return c;
}

SimConfig ginibre_scenario(std::uint64_t seed) {
  SimConfig c;
  c.state = StateKind::Ginibre;
  c.eps_mean = 0.7;
  c.eps_sd = 0.03;
  c.eta = 0.2;
  c.n_total = 100000;
  c.dark_mean = 100.0;
  c.bob_errors = true;
  c.seed = seed;
  return c;
}

int trial_count(int full, const Options& opt) {
  if (opt.trials > 0) return opt.trials;
  if (!(opt.scale > 0.0 && opt.scale <= 1.0)) throw std::invalid_argument("scale must lie in (0, 1]");
  return std::max(1, static_cast<int>(std::lround(full * opt.scale)));
}

std::uint64_t point_seed(std::uint64_t master, int point) {
  return derive_seed(master ^ 0x5eedf00dULL, static_cast<std::uint64_t>(point));
}

Table record_table(const std::vector<std::string>& prefix_cols) {
  Table t;
  t.columns = with(prefix_cols, {"trial", "model", "ok", "converged", "n", "logL", "aic", "aicc", "delta_aic",
                                 "delta_aicc", "fidelity", "infidelity", "steering_weight", "true_weight",
                                 "eps_mean_hat", "gamma_mean_hat"});
  return t;
}

void append_records(Table& t, const std::vector<std::string>& prefix, const MonteCarloResult& res) {
  for (const auto& r : res.records) {
    t.add(with(prefix, {std::to_string(r.trial), to_string(r.model), r.ok ? "1" : "0", r.converged ? "1" : "0",
                        std::to_string(r.n), fmt(r.logL), fmt(r.aic), fmt(r.aicc), fmt(r.delta_aic),
                        fmt(r.delta_aicc), fmt(r.fidelity), fmt(1.0 - r.fidelity), fmt(r.steering_weight),
                        fmt(r.true_weight), fmt(r.eps_mean_hat), fmt(r.gamma_mean_hat)}));
  }
}

Bundle fig1(const Options& opt) {
  const int trials = trial_count(100, opt);
  Table rec = record_table({"s", "eta"});
  Table sum;
  sum.columns = with({"s", "eta", "model", "win_fraction", "metric"}, kStatCols);
  const auto grid = eta_grid();
  int point = 0;
  for (double s : {0.0, 0.03}) {
    for (double eta : grid) {
      const auto cfg = isotropic_scenario(eta, s, point_seed(opt.seed, point++));
      const auto res = run_monte_carlo(cfg, trials, kAllModels, mc_options(opt, false, true));
      append_records(rec, {fmt(s), fmt(eta)}, res);
      for (ModelId m : kAllModels) {
        const std::vector<std::string> pre{fmt(s), fmt(eta), to_string(m), fmt(res.win_fraction(m))};
        sum.add(summary_row(with(pre, {"delta_aic"}), res.summarize(m, &TrialRecord::delta_aic)));
        if (m != ModelId::M0) {
          // Infidelity quartiles are 1 - fidelity quartiles with q1/q3 swapped.
          auto f = res.summarize(m, &TrialRecord::fidelity);
          MetricSummary inf{1.0 - f.median, 1.0 - f.q3, 1.0 - f.q1, 1.0 - f.mean, f.sd, f.count};
          sum.add(summary_row(with(pre, {"infidelity"}), inf));
        }
      }
    }
  }
  return {{"fig1_trials.csv", rec}, {"fig1_summary.csv", sum}};
}

Bundle fig2(const Options& opt) {
  const int trials = trial_count(500, opt);
  const auto res = run_monte_carlo(ginibre_scenario(point_seed(opt.seed, 0)), trials, kAllModels,
                                   mc_options(opt, false, true));
  Table rec = record_table({});
  append_records(rec, {}, res);
  Table sum;
  sum.columns = {"model", "win_fraction", "fidelity_median", "fidelity_q1", "fidelity_q3", "frac_fidelity_gt_0_99",
                 "count"};
  for (ModelId m : kAllModels) {
    const auto f = res.summarize(m, &TrialRecord::fidelity);
    int hi = 0, n = 0;
    for (const auto& r : res.records)
      if (r.ok && r.model == m && std::isfinite(r.fidelity)) {
        ++n;
        hi += r.fidelity > 0.99;
      }
    sum.add({to_string(m), fmt(res.win_fraction(m)), fmt(f.median), fmt(f.q1), fmt(f.q3),
             fmt(n ? static_cast<double>(hi) / n : std::nan("")), std::to_string(n)});
  }
  return {{"fig2_trials.csv", rec}, {"fig2_summary.csv", sum}};
}

Bundle fig3(const Options& opt) {
  const int trials = trial_count(100, opt);
  Table rec = record_table({"eta"});
  Table sum;
  sum.columns = {"eta", "model", "weight_mean", "weight_sd", "true_mean", "true_sd", "bias", "count"};
  int point = 0;
  for (double eta : eta_grid()) {
    const auto cfg = isotropic_scenario(eta, 0.03, point_seed(opt.seed, 100 + point++));
    const auto res = run_monte_carlo(cfg, trials, kLossModels, mc_options(opt, true, false));
    append_records(rec, {fmt(eta)}, res);
    const auto truth = res.summarize(ModelId::M3, &TrialRecord::true_weight);
    for (ModelId m : kLossModels) {
      const auto w = res.summarize(m, &TrialRecord::steering_weight);
      sum.add({fmt(eta), to_string(m), fmt(w.mean), fmt(w.sd), fmt(truth.mean), fmt(truth.sd),
               fmt(w.mean - truth.mean), std::to_string(w.count)});
    }
  }
  return {{"fig3_trials.csv", rec}, {"fig3_summary.csv", sum}};
}

double insensitivity_fidelity(double nu, double eps) {
  return assemblage_fidelity(isotropic_assemblage(nu, eps), isotropic_assemblage(1.0, eps));
}

Bundle figS3(const Options&) {
  Table t;
  t.columns = {"nu", "eps", "fidelity"};
  for (double nu : {0.25, 0.5, 0.75})
    for (int k = 1; k <= 20; ++k) {
      const double eps = 0.05 * k;
      t.add({fmt(nu), fmt(eps), fmt(insensitivity_fidelity(nu, eps))});
    }
  return {{"figS3_curves.csv", t}};
}

Bundle figS4(const Options& opt) {
  const int trials = trial_count(50, opt);
  Table rec = record_table({"n_total"});
  Table sum;
  sum.columns = {"n_total", "model", "mean_abs_diff", "max_abs_diff", "delta_aic_mean", "delta_aicc_mean", "count"};
  const std::vector<std::int64_t> ns{1000, 3000, 10000, 30000, 100000};
  int point = 0;
  for (auto n : ns) {
    auto cfg = isotropic_scenario(0.2, 0.03, point_seed(opt.seed, 200 + point++));
    cfg.n_total = n;
    const auto res = run_monte_carlo(cfg, trials, kAllModels, mc_options(opt, false, false));
    append_records(rec, {std::to_string(n)}, res);
    for (ModelId m : kAllModels) {
      double s = 0.0, mx = 0.0, da = 0.0, dc = 0.0;
      int c = 0;
      for (const auto& r : res.records) {
        if (!r.ok || r.model != m || !std::isfinite(r.delta_aicc)) continue;
        const double d = std::abs(r.delta_aicc - r.delta_aic);
        s += d;
        mx = std::max(mx, d);
        da += r.delta_aic;
        dc += r.delta_aicc;
        ++c;
      }
      const double nan = std::nan("");
      sum.add({std::to_string(n), to_string(m), fmt(c ? s / c : nan), fmt(c ? mx : nan), fmt(c ? da / c : nan),
               fmt(c ? dc / c : nan), std::to_string(c)});
    }
  }
  return {{"figS4_trials.csv", rec}, {"figS4_summary.csv", sum}};
}

Bundle reproduce(const std::string& id, const Options& opt) {
  if (id == "fig1") return fig1(opt);
  if (id == "fig2") return fig2(opt);
  if (id == "fig3") return fig3(opt);
  if (id == "figS3") return figS3(opt);
  if (id == "figS4") return figS4(opt);
  throw std::invalid_argument("unknown figure id '" + id + "'");
}

}  // namespace qat::repro
