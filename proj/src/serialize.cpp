#include "qat/serialize.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace qat::io {

namespace {

double num_or_nan(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

const char* outcome_label(Index a) {
  switch (a) {
    case 0: return "p";
    case 1: return "m";
    case 2: return "null";
  }
  throw std::invalid_argument("counts: Alice outcome index out of range");
}

}  // namespace

void check_version(const Json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("format_version"))
    throw InputError(what + ": missing format_version");
  const auto v = j.at("format_version").get<std::string>();
  const std::string ours(kFormatVersion);
  if (v.substr(0, v.find('.')) != ours.substr(0, ours.find('.')))
    throw InputError(what + ": unsupported format_version " + v);
}

Json matrix_to_json(const HermitianOp& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

HermitianOp matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw InputError("matrix: expected a non-empty array of rows");
  const auto n = static_cast<Index>(j.size());
  HermitianOp m(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n) throw InputError("matrix: rows must form a square");
    for (Index k = 0; k < n; ++k) {
      const auto& e = row[static_cast<std::size_t>(k)];
      if (!e.is_array() || e.size() != 2) throw InputError("matrix: entries must be [re, im] pairs");
      m(i, k) = {e[0].get<double>(), e[1].get<double>()};
    }
  }
  return m;
}

Json assemblage_to_json(const Assemblage& a) {
  Json el = Json::array();
  for (const auto& row : a.elements()) {
    Json r = Json::array();
    for (const auto& s : row) r.push_back(matrix_to_json(s));
    el.push_back(std::move(r));
  }
  return {{"format_version", kFormatVersion},
          {"m", a.settings()},
          {"n_a", a.outcomes()},
          {"dim", a.dim()},
          {"elements", std::move(el)}};
}

Assemblage assemblage_from_json(const Json& j) {
  check_version(j, "assemblage");
  try {
    const auto m = j.at("m").get<Index>();
    const auto n = j.at("n_a").get<Index>();
    const auto d = j.at("dim").get<Index>();
    const auto& el = j.at("elements");
    if (static_cast<Index>(el.size()) != m) throw InputError("assemblage: element rows do not match m");
    std::vector<std::vector<HermitianOp>> out;
    for (const auto& row : el) {
      if (static_cast<Index>(row.size()) != n) throw InputError("assemblage: element count does not match n_a");
      std::vector<HermitianOp> r;
      for (const auto& s : row) {
        r.push_back(matrix_from_json(s));
        if (r.back().rows() != d) throw InputError("assemblage: element dimension does not match dim");
      }
      out.push_back(std::move(r));
    }
    return Assemblage(std::move(out));
  } catch (const Json::exception& e) {
    throw InputError(std::string("assemblage: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

Json measurements_to_json(const MeasurementSet& m) {
  Json el = Json::array();
  for (const auto& row : m.elements()) {
    Json r = Json::array();
    for (const auto& s : row) r.push_back(matrix_to_json(s));
    el.push_back(std::move(r));
  }
  return {{"format_version", kFormatVersion}, {"settings", m.settings()}, {"outcomes", m.outcomes()},
          {"elements", std::move(el)}};
}

MeasurementSet measurements_from_json(const Json& j) {
  check_version(j, "measurements");
  try {
    std::vector<std::vector<HermitianOp>> out;
    for (const auto& row : j.at("elements")) {
      std::vector<HermitianOp> r;
      for (const auto& s : row) r.push_back(matrix_from_json(s));
      out.push_back(std::move(r));
    }
    return MeasurementSet(std::move(out));
  } catch (const Json::exception& e) {
    throw InputError(std::string("measurements: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

Json loss_to_json(const LossParams& p) { return {{"eps", p.eps}, {"gamma", p.gamma}}; }

LossParams loss_from_json(const Json& j) {
  try {
    LossParams p{j.at("eps").get<std::vector<double>>(), j.at("gamma").get<std::vector<double>>()};
    p.validate(1e-9);
    return p;
  } catch (const Json::exception& e) {
    throw InputError(std::string("loss parameters: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

Json fit_to_json(const FitResult& r, bool emit_trace) {
  Json j{{"format_version", kFormatVersion},
         {"model", to_string(r.model)},
         {"logL", finite_or_null(r.logL)},
         {"aic", finite_or_null(r.aic)},
         {"aicc", r.aicc ? finite_or_null(*r.aicc) : Json(nullptr)},
         {"p", r.p},
         {"n", r.n},
         {"converged", r.converged}};
  if (r.assemblage_hat) {
    j["assemblage"] = assemblage_to_json(*r.assemblage_hat);
    j["rho_B"] = matrix_to_json(r.rho_B_hat);
    j["params"] = loss_to_json(r.params_hat);
    // Null elements are rho_B minus the two conclusive elements.
    j["null_element_convention"] = "rho_B - s_plus - s_minus";
  } else {
    j["assemblage"] = nullptr;
    j["frequencies"] = r.frequencies;
  }
  Json tr = Json::array();
  if (emit_trace) {
    for (const auto& [it, ll] : r.trace) tr.push_back({it, finite_or_null(ll)});
  } else if (!r.trace.empty()) {
    tr.push_back({r.trace.back().first, finite_or_null(r.trace.back().second)});
  }
  j["trace"] = std::move(tr);
  j["diagnostics"] = {{"ns_defect", r.diagnostics.ns_defect},
                      {"min_eigenvalue", finite_or_null(r.diagnostics.min_eigenvalue)},
                      {"bound_violation", r.diagnostics.bound_violation},
                      {"outer_iterations", r.diagnostics.outer_iterations},
                      {"subproblem_solves", r.diagnostics.subproblem_solves}};
  return j;
}

FitResult fit_from_json(const Json& j) {
  check_version(j, "fit result");
  try {
    FitResult r;
    r.model = parse_model(j.at("model").get<std::string>());
    r.logL = j.at("logL").is_null() ? -std::numeric_limits<double>::infinity() : j.at("logL").get<double>();
    r.aic = num_or_nan(j.at("aic"));
    if (!j.at("aicc").is_null()) r.aicc = j.at("aicc").get<double>();
    r.p = j.at("p").get<int>();
    r.n = j.at("n").get<std::int64_t>();
    r.converged = j.at("converged").get<bool>();
    if (!j.at("assemblage").is_null()) {
      r.assemblage_hat = assemblage_from_json(j.at("assemblage"));
      r.rho_B_hat = matrix_from_json(j.at("rho_B"));
      r.params_hat = loss_from_json(j.at("params"));
    } else if (j.contains("frequencies")) {
      r.frequencies = j.at("frequencies").get<std::vector<double>>();
    }
    for (const auto& t : j.at("trace")) r.trace.emplace_back(t[0].get<int>(), num_or_nan(t[1]));
    if (j.contains("diagnostics")) {
      const auto& d = j.at("diagnostics");
      r.diagnostics.ns_defect = d.value("ns_defect", 0.0);
      r.diagnostics.min_eigenvalue = num_or_nan(d.value("min_eigenvalue", Json(nullptr)));
      r.diagnostics.bound_violation = d.value("bound_violation", 0.0);
      r.diagnostics.outer_iterations = d.value("outer_iterations", 0);
      r.diagnostics.subproblem_solves = d.value("subproblem_solves", 0);
    }
    return r;
  } catch (const Json::exception& e) {
    throw InputError(std::string("fit result: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

Json steering_to_json(const SteeringResult& r, bool certificates) {
  Json j{{"format_version", kFormatVersion}, {"weight", r.weight}, {"gap", r.gap}};
  if (certificates) {
    Json c = Json::array();
    for (const auto& s : r.lhs_members) c.push_back(matrix_to_json(s));
    j["lhs_members"] = std::move(c);
  }
  return j;
}

Json truth_to_json(const GroundTruth& t) {
  return {{"format_version", kFormatVersion},
          {"rho_AB", matrix_to_json(t.rho_ab)},
          {"loss", loss_to_json(t.loss)},
          {"ideal_assemblage", assemblage_to_json(t.ideal_assemblage)},
          {"observed_assemblage", assemblage_to_json(t.observed_assemblage)},
          {"bob_ideal", measurements_to_json(t.bob_ideal)},
          {"bob_actual", measurements_to_json(t.bob_actual)}};
}

std::string counts_to_csv(const CountTensor& c) {
  if (c.bob_outcomes() != 2) throw std::invalid_argument("counts_to_csv: Bob outcomes must be {p, m}");
  std::ostringstream os;
  os << "x,a,y,b,count\n";
  for (Index x = 0; x < c.alice_settings(); ++x)
    for (Index a = 0; a < c.alice_outcomes(); ++a)
      for (Index y = 0; y < c.bob_settings(); ++y)
        for (Index b = 0; b < c.bob_outcomes(); ++b)
          os << x << ',' << outcome_label(a) << ',' << y << ',' << (b == 0 ? "p" : "m") << ',' << c(x, a, y, b)
             << '\n';
  return os.str();
}

CountTensor counts_from_csv(const std::string& text) {
  struct Row {
    Index x, a, y, b;
    std::int64_t n;
    int line;
  };
  std::istringstream is(text);
  std::string line;
  int ln = 0;
  bool header = false;
  std::vector<Row> rows;
  auto parse_int = [](const std::string& s, std::int64_t& out) {
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end;
  };
  while (std::getline(is, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!header) {
      if (trim(line) != "x,a,y,b,count") throw InputError("counts: expected header 'x,a,y,b,count'", ln);
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(trim(cell));
    if (f.size() != 5) throw InputError("counts: expected 5 fields", ln);
    Row r{};
    r.line = ln;
    std::int64_t v = 0;
    if (!parse_int(f[0], v) || v < 0) throw InputError("counts: bad setting index '" + f[0] + "'", ln);
    r.x = v;
    if (f[1] == "p") r.a = 0;
    else if (f[1] == "m") r.a = 1;
    else if (f[1] == "null") r.a = 2;
    else throw InputError("counts: Alice outcome must be p, m or null", ln);
    if (!parse_int(f[2], v) || v < 0) throw InputError("counts: bad Bob setting index '" + f[2] + "'", ln);
    r.y = v;
    if (f[3] == "p") r.b = 0;
    else if (f[3] == "m") r.b = 1;
    else throw InputError("counts: Bob outcome must be p or m", ln);
    if (!parse_int(f[4], r.n) || r.n < 0) throw InputError("counts: count must be a nonnegative integer", ln);
    rows.push_back(r);
  }
  if (!header) throw InputError("counts: empty file");
  if (rows.empty()) throw InputError("counts: no data rows");
  Index m = 0, mb = 0;
  for (const auto& r : rows) {
    m = std::max(m, r.x + 1);
    mb = std::max(mb, r.y + 1);
  }
  CountTensor c(m, 3, mb, 2);
  std::vector<int> seen(static_cast<std::size_t>(c.cells()), 0);
  for (const auto& r : rows) {
    const auto idx = static_cast<std::size_t>(((r.x * 3 + r.a) * mb + r.y) * 2 + r.b);
    if (seen[idx]) throw InputError("counts: duplicate cell", r.line);
    seen[idx] = r.line;
    c.set(r.x, r.a, r.y, r.b, r.n);
  }
  if (static_cast<Index>(rows.size()) != c.cells())
    throw InputError("counts: incomplete table, expected " + std::to_string(c.cells()) + " rows, found " +
                     std::to_string(rows.size()));
  return c;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

Json read_json(const std::filesystem::path& p) {
  try {
    return Json::parse(read_file(p));
  } catch (const Json::parse_error& e) {
    throw InputError(p.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& p, const Json& j) { write_file(p, j.dump(2) + "\n"); }

std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256_hex: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

std::string state_kind_name(StateKind k) {
  switch (k) {
    case StateKind::Isotropic: return "isotropic";
    case StateKind::Ginibre: return "ginibre";
    case StateKind::Explicit: return "explicit";
  }
  return "?";
}

namespace {

// 1-based line of `key` inside `[section]`, 0 if not found.
int locate(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream is(text);
  std::string line, cur;
  int ln = 0;
  while (std::getline(is, line)) {
    ++ln;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      cur = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos && cur == section && trim(t.substr(0, eq)) == key) return ln;
  }
  return 0;
}

int locate_section(const std::string& text, const std::string& section) {
  std::istringstream is(text);
  std::string line;
  int ln = 0;
  while (std::getline(is, line)) {
    ++ln;
    const std::string t = trim(line);
    if (t.size() >= 2 && t.front() == '[' && t.back() == ']' && trim(t.substr(1, t.size() - 2)) == section) return ln;
  }
  return 0;
}

struct Reader {
  const std::string& text;
  std::string section;

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw InputError("[" + section + "] " + key + ": " + msg, locate(text, section, key));
  }
  double real(const std::string& key, const std::string& v) const {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end || !std::isfinite(out)) fail(key, "expected a number, got '" + v + "'");
    return out;
  }
  std::int64_t integer(const std::string& key, const std::string& v) const {
    std::int64_t out = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) fail(key, "expected an integer, got '" + v + "'");
    return out;
  }
  std::uint64_t uinteger(const std::string& key, const std::string& v) const {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) fail(key, "expected a nonnegative integer, got '" + v + "'");
    return out;
  }
  bool boolean(const std::string& key, const std::string& v) const {
    const auto l = lower(v);
    if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
    if (l == "false" || l == "0" || l == "no" || l == "off") return false;
    fail(key, "expected true or false, got '" + v + "'");
  }
};

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InputError(e.message(), static_cast<int>(e.line()));
  }

  RunConfig rc;
  for (const auto& [name, sec] : tree) {
    if (sec.empty()) throw InputError("key '" + name + "' outside a section", locate(text, "", name));
    Reader rd{text, name};
    if (name == "simulation") {
      SimConfig& s = rc.sim;
      for (const auto& [key, node] : sec) {
        const std::string v = trim(node.data());
        if (key == "state") {
          const auto l = lower(v);
          if (l == "isotropic") s.state = StateKind::Isotropic;
          else if (l == "ginibre") s.state = StateKind::Ginibre;
          else if (l == "explicit") s.state = StateKind::Explicit;
          else rd.fail(key, "expected isotropic, ginibre or explicit");
        } else if (key == "nu") s.nu = rd.real(key, v);
        else if (key == "state_file") rc.state_file = v;
        else if (key == "eps") s.eps_mean = rd.real(key, v);
        else if (key == "eps_sd") s.eps_sd = rd.real(key, v);
        else if (key == "eta") s.eta = rd.real(key, v);
        else if (key == "n_total") s.n_total = rd.integer(key, v);
        else if (key == "dark_mean") s.dark_mean = rd.real(key, v);
        else if (key == "retardation_sd") s.retardation_sd = rd.real(key, v);
        else if (key == "angle_sd_deg") s.angle_sd_deg = rd.real(key, v);
        else if (key == "bob_errors") s.bob_errors = rd.boolean(key, v);
        else if (key == "seed") s.seed = rd.uinteger(key, v);
        else rd.fail(key, "unknown key");
      }
    } else if (name == "fit") {
      FitConfig& f = rc.fit;
      for (const auto& [key, node] : sec) {
        const std::string v = trim(node.data());
        if (key == "model") {
          try {
            f.model = parse_model(v);
          } catch (const std::invalid_argument&) {
            rd.fail(key, "expected m0, m1, m2 or m3");
          }
        } else if (key == "outer_tol") f.outer_tol = rd.real(key, v);
        else if (key == "inner_tol") f.inner_tol = rd.real(key, v);
        else if (key == "delta_init") f.delta_init = rd.real(key, v);
        else if (key == "delta_shrink") f.delta_shrink = rd.real(key, v);
        else if (key == "delta_grow") f.delta_grow = rd.real(key, v);
        else if (key == "delta_min") f.delta_min = rd.real(key, v);
        else if (key == "max_outer") f.max_outer = static_cast<int>(rd.integer(key, v));
        else if (key == "max_inner") f.max_inner = static_cast<int>(rd.integer(key, v));
        else if (key == "subproblem_tol") f.subproblem_tol = rd.real(key, v);
        else if (key == "seed") f.seed = rd.uinteger(key, v);
        else if (key == "inner_solve") {
          const auto l = lower(v);
          if (l == "joint") f.inner_solve = InnerSolve::Joint;
          else if (l == "profile") f.inner_solve = InnerSolve::Profile;
          else rd.fail(key, "expected joint or profile");
        } else rd.fail(key, "unknown key");
      }
    } else {
      throw InputError("unknown section [" + name + "]", locate_section(text, name));
    }
  }

  if (rc.sim.state == StateKind::Explicit) {
    if (rc.state_file.empty())
      throw InputError("[simulation] state_file: required for an explicit state", locate(text, "simulation", "state"));
    std::filesystem::path sp(rc.state_file);
    if (sp.is_relative() && !base_dir.empty()) sp = base_dir / sp;
    const Json j = read_json(sp);
    rc.sim.rho_explicit = matrix_from_json(j.is_object() && j.contains("rho") ? j.at("rho") : j);
  }
  try {
    rc.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  try {
    rc.fit.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return rc;
}

RunConfig load_config(const std::filesystem::path& p) { return parse_config(read_file(p), p.parent_path()); }

Json sim_config_to_json(const SimConfig& c) {
  return {{"state", state_kind_name(c.state)},
          {"nu", c.nu},
          {"eps", c.eps_mean},
          {"eps_sd", c.eps_sd},
          {"eta", c.eta},
          {"n_total", c.n_total},
          {"dark_mean", c.dark_mean},
          {"retardation_sd", c.retardation_sd},
          {"angle_sd_deg", c.angle_sd_deg},
          {"bob_errors", c.bob_errors},
          {"seed", c.seed},
          {"budget_allocation", "uniform over (x, y) pairs; n_total counts across all pairs"}};
}

Json fit_config_to_json(const FitConfig& c) {
  return {{"model", to_string(c.model)},
          {"outer_tol", c.outer_tol},
          {"inner_tol", c.inner_tol},
          {"delta_init", c.delta_init},
          {"delta_shrink", c.delta_shrink},
          {"delta_grow", c.delta_grow},
          {"delta_min", c.delta_min},
          {"max_outer", c.max_outer},
          {"max_inner", c.max_inner},
          {"subproblem_tol", c.subproblem_tol},
          {"seed", c.seed},
          {"inner_solve", c.inner_solve == InnerSolve::Joint ? "joint" : "profile"}};
}

}  // namespace qat::io
