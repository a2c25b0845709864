#include "cli.hpp"

#include "qat/reproduce.hpp"
#include "qat/serialize.hpp"
#include "qat/steering.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#ifndef QAT_VERSION
#define QAT_VERSION "0.0.0-unknown"
#endif

namespace qat::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

using Clock = std::chrono::steady_clock;

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

class Manifest {
 public:
  Manifest(std::string command, int argc, const char* const* argv) : start_(Clock::now()) {
    doc_["format_version"] = io::kFormatVersion;
    doc_["command"] = std::move(command);
    Json args = Json::array();
    for (int i = 0; i < argc; ++i) args.push_back(argv[i]);
    doc_["argv"] = std::move(args);
    doc_["code_version"] = QAT_VERSION;
    doc_["started_utc"] = utc_now();
    doc_["inputs"] = Json::object();
    doc_["outputs"] = Json::object();
  }
  Json& operator[](const std::string& k) { return doc_[k]; }
  void input(const fs::path& p, const std::string& content) { doc_["inputs"][p.string()] = io::sha256_hex(content); }
  void output(const fs::path& p, const std::string& content) {
    io::write_file(p, content);
    doc_["outputs"][p.string()] = io::sha256_hex(content);
  }
  void write(const fs::path& p) {
    doc_["elapsed_seconds"] = std::chrono::duration<double>(Clock::now() - start_).count();
    io::write_json(p, doc_);
  }

 private:
  Json doc_;
  Clock::time_point start_;
};

fs::path manifest_for_file(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

// Accepts an assemblage document, a fit result or a ground-truth document.
Assemblage load_any_assemblage(const fs::path& p) {
  const Json j = io::read_json(p);
  if (j.is_object() && j.contains("elements")) return io::assemblage_from_json(j);
  if (j.is_object() && j.contains("assemblage")) {
    io::check_version(j, p.string());
    if (j.at("assemblage").is_null()) throw io::InputError(p.string() + ": fit carries no assemblage (M0)");
    return io::assemblage_from_json(j.at("assemblage"));
  }
  if (j.is_object() && j.contains("observed_assemblage")) {
    io::check_version(j, p.string());
    return io::assemblage_from_json(j.at("observed_assemblage"));
  }
  throw io::InputError(p.string() + ": no assemblage found");
}

struct SimulateArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a, int argc, const char* const* argv, std::ostream& out) {
  Manifest man("simulate", argc, argv);
  const std::string text = io::read_file(a.config);
  man.input(a.config, text);
  auto rc = io::parse_config(text, fs::path(a.config).parent_path());
  if (a.seed) rc.sim.seed = *a.seed;
  man["config"] = {{"simulation", io::sim_config_to_json(rc.sim)}};
  man["seed"] = rc.sim.seed;

  Rng rng(derive_seed(rc.sim.seed, 0));
  const GroundTruth truth = make_ground_truth(rc.sim, rng);
  const CountTensor counts = generate_counts(truth, truth.bob_actual, rc.sim, rng);

  const fs::path dir(a.out);
  man.output(dir / "counts.csv", io::counts_to_csv(counts));
  man.output(dir / "truth.json", io::truth_to_json(truth).dump(2) + "\n");
  man.output(dir / "bob.json", io::measurements_to_json(truth.bob_ideal).dump(2) + "\n");
  man.write(dir / "manifest.json");
  out << "wrote " << (dir / "counts.csv").string() << " (" << counts.total() << " counts)\n";
  return kOk;
}

struct FitArgs {
  std::string counts, config, out, model, measurements;
  std::optional<std::uint64_t> seed;
  bool emit_trace = false;
};

int cmd_fit(const FitArgs& a, int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Manifest man("fit", argc, argv);
  FitConfig cfg;
  if (!a.config.empty()) {
    const std::string text = io::read_file(a.config);
    man.input(a.config, text);
    cfg = io::parse_config(text, fs::path(a.config).parent_path()).fit;
  }
  if (!a.model.empty()) {
    try {
      cfg.model = parse_model(a.model);
    } catch (const std::invalid_argument& e) {
      throw io::InputError(e.what());
    }
  }
  if (a.seed) cfg.seed = *a.seed;
  man["config"] = {{"fit", io::fit_config_to_json(cfg)}};
  man["seed"] = cfg.seed;

  const std::string csv = io::read_file(a.counts);
  man.input(a.counts, csv);
  const std::string data_hash = io::sha256_hex(csv);
  const CountTensor counts = io::counts_from_csv(csv);

  MeasurementSet bob;
  if (!a.measurements.empty()) {
    const std::string mt = io::read_file(a.measurements);
    man.input(a.measurements, mt);
    try {
      bob = io::measurements_from_json(Json::parse(mt));
    } catch (const Json::parse_error& e) {
      throw io::InputError(a.measurements + ": " + e.what());
    }
  } else {
    bob = pauli_measurements();
  }
  if (bob.settings() != counts.bob_settings() || bob.outcomes() != counts.bob_outcomes())
    throw io::InputError("counts have " + std::to_string(counts.bob_settings()) +
                         " Bob settings but the measurement set has " + std::to_string(bob.settings()));

  const FitResult r = fit(counts, bob, cfg);
  Json j = io::fit_to_json(r, a.emit_trace);
  j["data_sha256"] = data_hash;
  j["counts_file"] = a.counts;
  man.output(a.out, j.dump(2) + "\n");
  man["converged"] = r.converged;
  man["data_sha256"] = data_hash;
  man.write(manifest_for_file(a.out));

  out << to_string(r.model) << " logL=" << std::setprecision(12) << r.logL << " aic=" << r.aic
      << " converged=" << (r.converged ? "true" : "false") << "\n";
  if (!r.converged) {
    err << "iteration cap reached; best iterate written to " << a.out << "\n";
    return kNotConverged;
  }
  return kOk;
}

struct SelectArgs {
  std::vector<std::string> fits;
  std::optional<std::int64_t> n;
  std::string out;
};

int cmd_select(const SelectArgs& a, int argc, const char* const* argv, std::ostream& out) {
  if (a.fits.size() < 2) throw io::InputError("select needs at least two fit results");
  Manifest man("select", argc, argv);
  std::vector<FitResult> fits;
  std::string hash;
  for (const auto& f : a.fits) {
    const std::string text = io::read_file(f);
    man.input(f, text);
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw io::InputError(f + ": " + e.what());
    }
    const std::string h = j.value("data_sha256", "");
    if (h.empty()) throw io::InputError(f + ": missing data_sha256");
    if (hash.empty()) hash = h;
    else if (h != hash) throw io::InputError(f + ": fitted to different data than " + a.fits.front());
    fits.push_back(io::fit_from_json(j));
  }
  const std::int64_t n = a.n.value_or(fits.front().n);
  std::vector<double> aics, aiccs;
  bool aicc_ok = true;
  for (const auto& f : fits) {
    aics.push_back(aic(f.logL, f.p));
    if (n > f.p + 1) aiccs.push_back(aicc(aics.back(), f.p, n));
    else aicc_ok = false;
  }
  const auto d = delta_aic(aics);
  const auto dc = aicc_ok ? delta_aic(aiccs) : std::vector<double>(fits.size(), std::nan(""));

  repro::Table t;
  t.columns = {"file", "model", "logL", "p", "n", "aic", "aicc", "delta_aic", "delta_aicc", "rel_likelihood", "winner"};
  for (std::size_t i = 0; i < fits.size(); ++i) {
    t.add({a.fits[i], to_string(fits[i].model), repro::fmt(fits[i].logL), std::to_string(fits[i].p),
           std::to_string(n), repro::fmt(aics[i]), repro::fmt(aicc_ok ? aiccs[i] : std::nan("")),
           repro::fmt(d[i]), repro::fmt(dc[i]), repro::fmt(relative_likelihood(d[i])), d[i] == 0.0 ? "*" : ""});
  }
  const std::string csv = t.to_csv();
  out << csv;
  man["data_sha256"] = hash;
  if (!a.out.empty()) {
    man.output(a.out, csv);
    man.write(manifest_for_file(a.out));
  }
  return kOk;
}

struct SteerArgs {
  std::string input, out, method = "ipm";
  double tol = 1e-7;
  bool certificates = false;
};

int cmd_steer(const SteerArgs& a, int argc, const char* const* argv, std::ostream& out) {
  Manifest man("steer", argc, argv);
  man.input(a.input, io::read_file(a.input));
  const Assemblage A = load_any_assemblage(a.input);
  const SdpMethod m = a.method == "barrier" ? SdpMethod::DualBarrier : SdpMethod::InteriorPoint;
  const SteeringResult r = steering_weight(A, a.tol, m);
  out << "steering_weight " << std::setprecision(10) << r.weight << " gap " << r.gap << "\n";
  if (!a.out.empty()) {
    man.output(a.out, io::steering_to_json(r, a.certificates).dump(2) + "\n");
    man["config"] = {{"method", a.method}, {"tol", a.tol}};
    man.write(manifest_for_file(a.out));
  }
  return kOk;
}

int cmd_fidelity(const std::string& fa, const std::string& fb, std::ostream& out) {
  const Assemblage A = load_any_assemblage(fa);
  const Assemblage B = load_any_assemblage(fb);
  out << "fidelity " << std::setprecision(12) << assemblage_fidelity(A, B) << "\n";
  return kOk;
}

struct ReproArgs {
  std::string figure, out, config;
  double scale = 1.0;
  int trials = 0, jobs = 1;
  std::optional<std::uint64_t> seed;
};

int cmd_reproduce(const ReproArgs& a, int argc, const char* const* argv, std::ostream& out) {
  Manifest man("reproduce", argc, argv);
  repro::Options opt;
  if (!a.config.empty()) {
    const std::string text = io::read_file(a.config);
    man.input(a.config, text);
    opt.fit = io::parse_config(text, fs::path(a.config).parent_path()).fit;
  }
  opt.scale = a.scale;
  opt.trials = a.trials;
  opt.jobs = a.jobs;
  if (a.seed) opt.seed = *a.seed;
  if (!(opt.scale > 0.0 && opt.scale <= 1.0)) throw io::InputError("--scale must lie in (0, 1]");
  man["config"] = {{"figure", a.figure}, {"scale", opt.scale}, {"trials", opt.trials}, {"jobs", opt.jobs},
                   {"fit", io::fit_config_to_json(opt.fit)}};
  man["seed"] = opt.seed;

  const auto bundle = repro::reproduce(a.figure, opt);
  const fs::path dir(a.out);
  for (const auto& [name, table] : bundle) {
    man.output(dir / name, table.to_csv());
    out << "wrote " << (dir / name).string() << " (" << table.rows.size() << " rows)\n";
  }
  man.write(dir / (a.figure + "_manifest.json"));
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Loss-aware assemblage reconstruction, model selection and steering quantification", "qat"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QAT_VERSION);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate counts and ground truth from a config");
  s->add_option("--config", sim.config, "INI configuration")->required();
  s->add_option("--out", sim.out, "Output directory")->required();
  s->add_option("--seed", sim.seed, "Override the simulation seed");

  FitArgs fa;
  auto* f = app.add_subcommand("fit", "Maximum-likelihood fit of one loss model");
  f->add_option("counts", fa.counts, "Counts CSV")->required();
  f->add_option("--model", fa.model, "m0, m1, m2 or m3");
  f->add_option("--config", fa.config, "INI configuration ([fit] section)");
  f->add_option("--out", fa.out, "FitResult JSON")->required();
  f->add_option("--seed", fa.seed, "Override the fit seed");
  f->add_option("--measurements", fa.measurements, "Bob measurement set JSON (default: ideal Paulis)");
  f->add_flag("--emit-trace", fa.emit_trace, "Include the full likelihood trace");

  SelectArgs sa;
  auto* sel = app.add_subcommand("select", "Rank fitted models by AIC");
  sel->add_option("fits", sa.fits, "FitResult JSON files")->required();
  sel->add_option("--n", sa.n, "Sample size for AICc (default: total counts)");
  sel->add_option("--out", sa.out, "Ranking CSV");

  SteerArgs st;
  auto* stc = app.add_subcommand("steer", "Steering weight of an assemblage");
  stc->add_option("input", st.input, "Assemblage, fit result or ground-truth JSON")->required();
  stc->add_option("--out", st.out, "Steering result JSON");
  stc->add_option("--method", st.method, "ipm or barrier")->check(CLI::IsMember({"ipm", "barrier"}));
  stc->add_option("--tol", st.tol, "Duality gap tolerance");
  stc->add_flag("--certificates", st.certificates, "Write the LHS members");

  std::string fid_a, fid_b;
  auto* fi = app.add_subcommand("fidelity", "Assemblage fidelity between two documents");
  fi->add_option("a", fid_a)->required();
  fi->add_option("b", fid_b)->required();

  ReproArgs ra;
  auto* rp = app.add_subcommand("reproduce", "Write the CSV bundle behind a figure");
  rp->add_option("figure", ra.figure, "fig1, fig2, fig3, figS3 or figS4")
      ->required()
      ->check(CLI::IsMember(repro::figure_ids()));
  rp->add_option("--out", ra.out, "Output directory")->required();
  rp->add_option("--scale", ra.scale, "Trial-count multiplier in (0, 1]");
  rp->add_option("--trials", ra.trials, "Trials per point (overrides --scale)");
  rp->add_option("--seed", ra.seed, "Master seed");
  rp->add_option("--jobs", ra.jobs, "Worker threads")->check(CLI::PositiveNumber);
  rp->add_option("--config", ra.config, "INI configuration ([fit] section)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*s) return cmd_simulate(sim, argc, argv, out);
    if (*f) return cmd_fit(fa, argc, argv, out, err);
    if (*sel) return cmd_select(sa, argc, argv, out);
    if (*stc) return cmd_steer(st, argc, argv, out);
    if (*fi) return cmd_fidelity(fid_a, fid_b, out);
    if (*rp) return cmd_reproduce(ra, argc, argv, out);
  } catch (const io::InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what() << " (best logL " << e.best_log_l() << ")\n";
    return kSolverFailure;
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kInputError;
}

}  // namespace qat::cli
