#include "cli.hpp"
#include "qat/serialize.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <unistd.h>

namespace fs = std::filesystem;
using namespace qat;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "qat");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("qat_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_config(const std::string& name, const std::string& body) {
  const auto p = scratch() / name;
  io::write_file(p, body);
  return p.string();
}

const char* kIsotropic = "[simulation]\nstate = isotropic\nnu = 0.8\neps = 0.7\neps_sd = 0.03\neta = 0.2\nseed = 5\n";

}  // namespace

TEST_CASE("simulate writes deterministic counts, truth and manifest") {
  const auto cfg = write_config("iso.ini", kIsotropic);
  const auto a = (scratch() / "simA").string(), b = (scratch() / "simB").string();
  REQUIRE(run({"simulate", "--config", cfg, "--out", a}).code == 0);
  REQUIRE(run({"simulate", "--config", cfg, "--out", b}).code == 0);
  const std::string ca = io::read_file(fs::path(a) / "counts.csv");
  CHECK(ca == io::read_file(fs::path(b) / "counts.csv"));
  CHECK(io::read_file(fs::path(a) / "truth.json") == io::read_file(fs::path(b) / "truth.json"));
  CHECK(std::count(ca.begin(), ca.end(), '\n') == 1 + 3 * 3 * 3 * 2);

  const auto man = io::read_json(fs::path(a) / "manifest.json");
  CHECK(man.at("seed") == 5);
  CHECK(man.contains("code_version"));
  CHECK(man.contains("elapsed_seconds"));
  CHECK(man.at("outputs").at((fs::path(a) / "counts.csv").string()) == io::sha256_hex(ca));
  CHECK(man.at("config").at("simulation").at("eta") == 0.2);

  CHECK(run({"simulate", "--config", cfg, "--out", (scratch() / "simC").string(), "--seed", "6"}).code == 0);
  CHECK(io::read_file(scratch() / "simC" / "counts.csv") != ca);
}

TEST_CASE("null fraction of simulated counts") {
  const auto cfg = write_config("flat.ini", "[simulation]\nnu = 0.8\neps = 0.7\ndark_mean = 0\nbob_errors = false\n");
  REQUIRE(run({"simulate", "--config", cfg, "--out", (scratch() / "flat").string()}).code == 0);
  const auto c = io::counts_from_csv(io::read_file(scratch() / "flat" / "counts.csv"));
  std::int64_t nulls = 0;
  for (Index x = 0; x < 3; ++x) nulls += c.outcome_total(x, 2);
  CHECK(static_cast<double>(nulls) / c.total() == doctest::Approx(0.3).epsilon(0.03));
}

TEST_CASE("malformed config exits 2 with the line") {
  const auto cfg = write_config("bad.ini", "[simulation]\nnu = 0.8\neps = seventy\n");
  const auto r = run({"simulate", "--config", cfg, "--out", (scratch() / "bad").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(run({"simulate", "--out", "x"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("fit, select, steer and fidelity") {
  const auto cfg = write_config("sel.ini", kIsotropic);
  const fs::path dir = scratch() / "sel";
  REQUIRE(run({"simulate", "--config", cfg, "--out", dir.string()}).code == 0);
  const auto counts = (dir / "counts.csv").string();
  std::vector<std::string> fits;
  for (std::string m : {"m0", "m1", "m2", "m3"}) {
    const auto out = (dir / ("fit_" + m + ".json")).string();
    const auto r = run({"fit", counts, "--model", m, "--out", out, "--emit-trace"});
    CHECK(r.code == 0);
    CHECK(fs::exists(out + ".manifest.json"));
    fits.push_back(out);
  }
  const auto j3 = io::read_json(fits[3]);
  CHECK(j3.at("model") == "M3");
  CHECK(j3.at("converged") == true);
  CHECK(j3.at("trace").size() >= 1);
  CHECK(j3.at("data_sha256") == io::sha256_hex(io::read_file(counts)));

  // M0 >= M3 >= M2 >= M1.
  double prev = 1e300;
  for (int i : {0, 3, 2, 1}) {
    const double ll = io::read_json(fits[static_cast<std::size_t>(i)]).at("logL");
    CHECK(ll <= prev + 1e-7);
    prev = ll;
  }

  auto sel = run({"select", fits[0], fits[1], fits[2], fits[3], "--out", (dir / "ranking.csv").string()});
  CHECK(sel.code == 0);
  CHECK(sel.out.find("rel_likelihood") != std::string::npos);
  std::istringstream rows(sel.out);
  std::string line, winner;
  while (std::getline(rows, line))
    if (!line.empty() && line.back() == '*') winner = line;
  CHECK(winner.find(",M3,") != std::string::npos);

  CHECK(run({"select", fits[1]}).code == 2);

  auto st = run({"steer", fits[3], "--out", (dir / "steer.json").string(), "--certificates"});
  CHECK(st.code == 0);
  const auto sj = io::read_json(dir / "steer.json");
  CHECK(sj.at("weight").get<double>() > 0.0);
  CHECK(sj.at("lhs_members").size() == 27);
  CHECK(run({"steer", fits[0]}).code == 2);

  auto fi = run({"fidelity", fits[3], (dir / "truth.json").string()});
  CHECK(fi.code == 0);
  CHECK(std::stod(fi.out.substr(fi.out.find(' ') + 1)) > 0.99);

  // Same model on other data: mismatched hashes are refused.
  const auto cfg2 = write_config("sel2.ini", std::string(kIsotropic) + "n_total = 50000\n");
  REQUIRE(run({"simulate", "--config", cfg2, "--out", (scratch() / "sel2").string()}).code == 0);
  const auto other = (scratch() / "sel2" / "fit.json").string();
  REQUIRE(run({"fit", (scratch() / "sel2" / "counts.csv").string(), "--model", "m1", "--out", other}).code == 0);
  CHECK(run({"select", fits[1], other}).code == 2);
}

TEST_CASE("select arithmetic with equal likelihoods") {
  io::Json a{{"format_version", "1.0"}, {"model", "M1"}, {"logL", -100.0}, {"aic", 254.0}, {"aicc", nullptr},
             {"p", 27}, {"n", 100000}, {"converged", true}, {"assemblage", nullptr}, {"trace", io::Json::array()},
             {"data_sha256", "abc"}};
  io::Json b = a;
  b["model"] = "M2";
  b["p"] = 30;
  io::write_json(scratch() / "eq_a.json", a);
  io::write_json(scratch() / "eq_b.json", b);
  const auto r = run({"select", (scratch() / "eq_a.json").string(), (scratch() / "eq_b.json").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find(",M2,-100,30,100000,260,") != std::string::npos);
  CHECK(r.out.find(",6,") != std::string::npos);
}

TEST_CASE("fit error paths") {
  const fs::path dir = scratch() / "errs";
  io::write_file(dir / "short.csv", "x,a,y,b,count\n0,p,0,p,3\n");
  CHECK(run({"fit", (dir / "short.csv").string(), "--out", (dir / "f.json").string()}).code == 2);
  CHECK(run({"fit", (dir / "missing.csv").string(), "--out", (dir / "f.json").string()}).code == 2);

  const auto cfg = write_config("sim_cap.ini", kIsotropic);
  REQUIRE(run({"simulate", "--config", cfg, "--out", dir.string()}).code == 0);
  const auto capped = write_config("cap.ini", "[fit]\nmax_outer = 1\nmax_inner = 1\n");
  const auto out = (dir / "capped.json").string();
  const auto r = run({"fit", (dir / "counts.csv").string(), "--model", "m3", "--config", capped, "--out", out});
  CHECK(r.code == 3);
  CHECK(fs::exists(out));
  CHECK(io::read_json(out).at("converged") == false);
}

TEST_CASE("reproduce writes CSV bundles") {
  const fs::path dir = scratch() / "repro";
  const auto r = run({"reproduce", "figS3", "--out", dir.string()});
  CHECK(r.code == 0);
  const std::string csv = io::read_file(dir / "figS3_curves.csv");
  CHECK(csv.rfind("nu,eps,fidelity\n", 0) == 0);
  CHECK(fs::exists(dir / "figS3_manifest.json"));
  CHECK(run({"reproduce", "fig9", "--out", dir.string()}).code == 2);
  CHECK(run({"reproduce", "fig1", "--out", dir.string(), "--scale", "1.5"}).code == 2);

  const auto f2 = run({"reproduce", "fig2", "--out", dir.string(), "--trials", "2", "--jobs", "1"});
  CHECK(f2.code == 0);
  const std::string trials = io::read_file(dir / "fig2_trials.csv");
  CHECK(std::count(trials.begin(), trials.end(), '\n') == 1 + 2 * 4);
}
