#ifndef QAT_ASSEMBLAGE_HPP
#define QAT_ASSEMBLAGE_HPP

#include "qat/qmat.hpp"

#include <vector>

namespace qat {

/// Outcome labels for Alice's lossy dichotomic measurements.
enum Outcome : Index { kPlus = 0, kMinus = 1, kNull = 2 };

struct Tolerances {
  double psd = 1e-8;
  double ns = 1e-8;
  double trace = 1e-8;
};

/// A family of POVMs indexed by setting: elements[x][a].
class MeasurementSet {
 public:
  MeasurementSet() = default;
  /// Validates PSD-ness and completeness of every setting within `tol`.
  explicit MeasurementSet(std::vector<std::vector<HermitianOp>> elements, double tol = 1e-9);

  Index settings() const { return static_cast<Index>(elements_.size()); }
  Index outcomes() const { return elements_.empty() ? 0 : static_cast<Index>(elements_[0].size()); }
  Index dim() const { return elements_.empty() ? 0 : elements_[0][0].rows(); }

  const HermitianOp& operator()(Index a, Index x) const {
    return elements_[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)];
  }
  const std::vector<std::vector<HermitianOp>>& elements() const { return elements_; }

 private:
  std::vector<std::vector<HermitianOp>> elements_;
};

/// Pauli eigenprojector pairs in setting order Z, X, Y; outcome 0 is the +1 eigenvector.
MeasurementSet pauli_measurements();

/// Lossy Pauli measurements with uniform efficiency: outcomes {+, -, null}.
MeasurementSet lossy_pauli_measurements(double eps);

/// Unnormalized conditional states sigma_{a|x} of Bob's system; elements[x][a].
class Assemblage {
 public:
  Assemblage() = default;
  /// Validates PSD, no-signalling and unit total trace.
  explicit Assemblage(std::vector<std::vector<HermitianOp>> elements, Tolerances tol = {});

  /// Skips validation. Used for intermediate iterates and perturbed test inputs.
  static Assemblage unchecked(std::vector<std::vector<HermitianOp>> elements);

  Index settings() const { return static_cast<Index>(elements_.size()); }
  Index outcomes() const { return elements_.empty() ? 0 : static_cast<Index>(elements_[0].size()); }
  Index dim() const { return elements_.empty() ? 0 : elements_[0][0].rows(); }

  const HermitianOp& operator()(Index a, Index x) const {
    return elements_[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)];
  }
  const std::vector<std::vector<HermitianOp>>& elements() const { return elements_; }

  /// Sum over outcomes for setting x.
  HermitianOp marginal(Index x) const;

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate(Tolerances tol = {}) const;

 private:
  void check_shape() const;
  std::vector<std::vector<HermitianOp>> elements_;
};

/// sigma_{a|x} = Tr_A[(E_{a|x} (x) I) rho_AB].
Assemblage steer(const HermitianOp& rho_ab, const MeasurementSet& alice, Index dim_a, Index dim_b);

/// Largest entry of sum_a sigma_{a|x} - sum_a sigma_{a|x'} over all setting pairs.
double ns_defect(const Assemblage& a);

/// min_x sum_a F(sigma_{a|x}, xi_{a|x}) with F the square-root fidelity.
double assemblage_fidelity(const Assemblage& a, const Assemblage& b);

/// nu |Phi+><Phi+| + (1 - nu) I/4.
HermitianOp isotropic_state(double nu);

/// Closed-form assemblage of the isotropic state under lossy, unbiased Pauli
/// measurements (settings Z, X, Y; outcomes +, -, null).
Assemblage isotropic_assemblage(double nu, double eps);

/// t A + (1 - t) B, element-wise; no validation.
Assemblage mix(const Assemblage& a, const Assemblage& b, double t);

}  // namespace qat

#endif  // QAT_ASSEMBLAGE_HPP
