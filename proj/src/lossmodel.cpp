#include "qat/lossmodel.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace qat {

std::string to_string(ModelId m) {
  switch (m) {
    case ModelId::M0: return "M0";
    case ModelId::M1: return "M1";
    case ModelId::M2: return "M2";
    case ModelId::M3: return "M3";
  }
  return "?";
}

ModelId parse_model(std::string_view s) {
  std::string t(s);
  for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "m0") return ModelId::M0;
  if (t == "m1") return ModelId::M1;
  if (t == "m2") return ModelId::M2;
  if (t == "m3") return ModelId::M3;
  throw std::invalid_argument("unknown model '" + std::string(s) + "'");
}

Offsets offset(double gamma) {
  const double a = std::abs(gamma);
  return {(a + gamma) / 2.0, (a - gamma) / 2.0};
}

bool LossParams::valid(double tol) const {
  if (eps.size() != gamma.size() || eps.empty()) return false;
  for (std::size_t x = 0; x < eps.size(); ++x) {
    if (!(eps[x] > 0.0 && eps[x] <= 1.0 + tol)) return false;
    if (!(std::abs(gamma[x]) <= 1.0 - eps[x] + tol)) return false;
    const auto f = offset(gamma[x]);
    if (eps[x] + f.plus > 1.0 + tol || eps[x] + f.minus > 1.0 + tol) return false;
  }
  return true;
}

void LossParams::validate(double tol) const {
  if (eps.size() != gamma.size()) throw std::invalid_argument("LossParams: eps and gamma lengths differ");
  if (eps.empty()) throw std::invalid_argument("LossParams: no settings");
  for (std::size_t x = 0; x < eps.size(); ++x) {
    if (!(eps[x] > 0.0 && eps[x] <= 1.0 + tol))
      throw std::invalid_argument("LossParams: eps[" + std::to_string(x) + "] outside (0, 1]");
    if (!(std::abs(gamma[x]) <= 1.0 - eps[x] + tol))
      throw std::invalid_argument("LossParams: |gamma[" + std::to_string(x) + "]| exceeds 1 - eps");
  }
  if (!valid(tol)) throw std::invalid_argument("LossParams: offset bound violated");
}

Assemblage observed_elements(const Assemblage& ideal, const LossParams& params) {
  if (ideal.outcomes() != 2)
    throw std::invalid_argument("observed_elements: ideal assemblage must have outcomes {+, -}");
  if (params.settings() != ideal.settings())
    throw std::invalid_argument("observed_elements: parameter count does not match settings");
  params.validate();
  std::vector<std::vector<HermitianOp>> out;
  for (Index x = 0; x < ideal.settings(); ++x) {
    const auto ux = static_cast<std::size_t>(x);
    const double cp = plus_scale(params.eps[ux], params.gamma[ux]);
    const double cm = minus_scale(params.eps[ux], params.gamma[ux]);
    HermitianOp sp = cp * ideal(kPlus, x);
    HermitianOp sm = cm * ideal(kMinus, x);
    // Completeness of Alice's lossy POVM fixes the null element from rho_B.
    HermitianOp s0 = hermitian_part(HermitianOp(ideal.marginal(x) - sp - sm));
    out.push_back({sp, sm, s0});
  }
  return Assemblage(std::move(out));
}

int param_count(ModelId model, Index m, Index dim, Index bob_settings) {
  if (m < 1 || dim < 1 || bob_settings < 1) throw std::invalid_argument("param_count: empty scenario");
  const bool canonical = (m == 3 && dim == 2 && bob_settings == 3);
  const int base = canonical ? 27 : static_cast<int>(m * 3 * bob_settings);
  switch (model) {
    case ModelId::M0:
      if (!canonical) throw std::invalid_argument("param_count: M0 is only tabulated for the canonical scenario");
      return 54;
    case ModelId::M1: return base;
    case ModelId::M2: return base + static_cast<int>(m);
    case ModelId::M3: return base + 2 * static_cast<int>(m);
  }
  throw std::invalid_argument("param_count: unknown model");
}

}  // namespace qat
