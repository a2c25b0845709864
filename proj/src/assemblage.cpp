#include "qat/assemblage.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

namespace qat {

namespace {

std::string at(Index a, Index x) {
  std::ostringstream os;
  os << "(a=" << a << ", x=" << x << ")";
  return os.str();
}

}  // namespace

MeasurementSet::MeasurementSet(std::vector<std::vector<HermitianOp>> elements, double tol)
    : elements_(std::move(elements)) {
  if (elements_.empty()) throw std::invalid_argument("MeasurementSet: no settings");
  const std::size_t n = elements_[0].size();
  if (n == 0) throw std::invalid_argument("MeasurementSet: no outcomes");
  const Index d = elements_[0][0].rows();
  for (std::size_t x = 0; x < elements_.size(); ++x) {
    if (elements_[x].size() != n)
      throw std::invalid_argument("MeasurementSet: ragged outcome count");
    HermitianOp sum = HermitianOp::Zero(d, d);
    for (std::size_t a = 0; a < n; ++a) {
      const auto& e = elements_[x][a];
      if (e.rows() != d || e.cols() != d)
        throw std::invalid_argument("MeasurementSet: dimension mismatch at " +
                                    at(static_cast<Index>(a), static_cast<Index>(x)));
      require_hermitian(e, "MeasurementSet", tol);
      if (min_eigenvalue(e) < -tol)
        throw std::invalid_argument("MeasurementSet: element not PSD at " +
                                    at(static_cast<Index>(a), static_cast<Index>(x)));
      sum += e;
    }
    if (max_abs_entry(sum - identity(d)) > tol)
      throw std::invalid_argument("MeasurementSet: elements of setting " + std::to_string(x) +
                                  " do not sum to the identity");
  }
}

MeasurementSet pauli_measurements() {
  std::vector<std::vector<HermitianOp>> e;
  for (const HermitianOp& p : {pauli_z(), pauli_x(), pauli_y()})
    e.push_back({(identity(2) + p) / 2.0, (identity(2) - p) / 2.0});
  return MeasurementSet(std::move(e));
}

MeasurementSet lossy_pauli_measurements(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("lossy_pauli_measurements: eps outside (0, 1]");
  std::vector<std::vector<HermitianOp>> e;
  for (const HermitianOp& p : {pauli_z(), pauli_x(), pauli_y()})
    e.push_back({eps * (identity(2) + p) / 2.0, eps * (identity(2) - p) / 2.0,
                 (1.0 - eps) * identity(2)});
  return MeasurementSet(std::move(e));
}

Assemblage::Assemblage(std::vector<std::vector<HermitianOp>> elements, Tolerances tol)
    : elements_(std::move(elements)) {
  validate(tol);
}

Assemblage Assemblage::unchecked(std::vector<std::vector<HermitianOp>> elements) {
  Assemblage out;
  out.elements_ = std::move(elements);
  out.check_shape();
  return out;
}

void Assemblage::check_shape() const {
  if (elements_.empty() || elements_[0].empty())
    throw std::invalid_argument("Assemblage: needs at least one setting and one outcome");
  const std::size_t n = elements_[0].size();
  const Index d = elements_[0][0].rows();
  if (d < 1) throw std::invalid_argument("Assemblage: empty matrices");
  for (const auto& row : elements_) {
    if (row.size() != n) throw std::invalid_argument("Assemblage: ragged outcome count");
    for (const auto& s : row)
      if (s.rows() != d || s.cols() != d) throw std::invalid_argument("Assemblage: dimension mismatch");
  }
}

HermitianOp Assemblage::marginal(Index x) const {
  const auto& row = elements_.at(static_cast<std::size_t>(x));
  HermitianOp sum = HermitianOp::Zero(dim(), dim());
  for (const auto& s : row) sum += s;
  return sum;
}

void Assemblage::validate(Tolerances tol) const {
  check_shape();
  for (Index x = 0; x < settings(); ++x) {
    for (Index a = 0; a < outcomes(); ++a) {
      const auto& s = (*this)(a, x);
      if (!is_hermitian(s, tol.psd))
        throw std::invalid_argument("Assemblage: element not Hermitian at " + at(a, x));
      if (min_eigenvalue(s) < -tol.psd)
        throw std::invalid_argument("Assemblage: element not PSD at " + at(a, x));
    }
    const double tr = trace_real(marginal(x));
    if (std::abs(tr - 1.0) > tol.trace)
      throw std::invalid_argument("Assemblage: total trace of setting " + std::to_string(x) +
                                  " is not 1");
  }
  if (ns_defect(*this) > tol.ns) throw std::invalid_argument("Assemblage: violates no-signalling");
}

Assemblage steer(const HermitianOp& rho_ab, const MeasurementSet& alice, Index dim_a, Index dim_b) {
  if (rho_ab.rows() != dim_a * dim_b || rho_ab.cols() != dim_a * dim_b)
    throw std::invalid_argument("steer: state dimension does not match dimA*dimB");
  if (alice.dim() != dim_a) throw std::invalid_argument("steer: measurement dimension mismatch");
  require_hermitian(rho_ab, "steer", 1e-10);
  if (std::abs(trace_real(rho_ab) - 1.0) > 1e-9) throw std::invalid_argument("steer: state not unit trace");
  if (min_eigenvalue(rho_ab) < -1e-9) throw std::invalid_argument("steer: state not PSD");

  const HermitianOp id_b = identity(dim_b);
  std::vector<std::vector<HermitianOp>> out(static_cast<std::size_t>(alice.settings()));
  for (Index x = 0; x < alice.settings(); ++x) {
    for (Index a = 0; a < alice.outcomes(); ++a) {
      HermitianOp s = partial_trace_A(kron(alice(a, x), id_b) * rho_ab, dim_a, dim_b);
      out[static_cast<std::size_t>(x)].push_back(hermitian_part(s));
    }
  }
  return Assemblage(std::move(out));
}

double ns_defect(const Assemblage& a) {
  double worst = 0.0;
  std::vector<HermitianOp> marg;
  for (Index x = 0; x < a.settings(); ++x) marg.push_back(a.marginal(x));
  for (std::size_t x = 0; x < marg.size(); ++x)
    for (std::size_t y = x + 1; y < marg.size(); ++y)
      worst = std::max(worst, max_abs_entry(marg[x] - marg[y]));
  return worst;
}

double assemblage_fidelity(const Assemblage& a, const Assemblage& b) {
  if (a.settings() != b.settings() || a.outcomes() != b.outcomes() || a.dim() != b.dim())
    throw std::invalid_argument("assemblage_fidelity: shape mismatch");
  for (const Assemblage* s : {&a, &b})
    for (Index x = 0; x < s->settings(); ++x)
      if (std::abs(trace_real(s->marginal(x)) - 1.0) > 1e-6)
        throw std::invalid_argument("assemblage_fidelity: assemblage is not normalized");
  double best = std::numeric_limits<double>::infinity();
  for (Index x = 0; x < a.settings(); ++x) {
    double acc = 0.0;
    for (Index o = 0; o < a.outcomes(); ++o) acc += sqrt_fidelity(a(o, x), b(o, x));
    best = std::min(best, acc);
  }
  return best;
}

HermitianOp isotropic_state(double nu) {
  if (!(nu >= 0.0 && nu <= 1.0)) throw std::invalid_argument("isotropic_state: nu outside [0, 1]");
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  return nu * projector(phi) + (1.0 - nu) * identity(4) / 4.0;
}

Assemblage isotropic_assemblage(double nu, double eps) {
  if (!(nu >= 0.0 && nu <= 1.0)) throw std::invalid_argument("isotropic_assemblage: nu outside [0, 1]");
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("isotropic_assemblage: eps outside (0, 1]");
  std::vector<std::vector<HermitianOp>> out;
  // Bob's conditional states follow the transpose of Alice's observable for |Phi+>.
  for (const HermitianOp& p : {pauli_z(), pauli_x(), pauli_y()}) {
    const HermitianOp pt = p.transpose();
    out.push_back({eps * (identity(2) + nu * pt) / 4.0, eps * (identity(2) - nu * pt) / 4.0,
                   (1.0 - eps) * identity(2) / 2.0});
  }
  return Assemblage(std::move(out));
}

Assemblage mix(const Assemblage& a, const Assemblage& b, double t) {
  if (a.settings() != b.settings() || a.outcomes() != b.outcomes() || a.dim() != b.dim())
    throw std::invalid_argument("mix: shape mismatch");
  auto el = a.elements();
  for (Index x = 0; x < a.settings(); ++x)
    for (Index o = 0; o < a.outcomes(); ++o)
      el[static_cast<std::size_t>(x)][static_cast<std::size_t>(o)] = t * a(o, x) + (1.0 - t) * b(o, x);
  return Assemblage::unchecked(std::move(el));
}

}  // namespace qat
