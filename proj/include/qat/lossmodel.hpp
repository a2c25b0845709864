#ifndef QAT_LOSSMODEL_HPP
#define QAT_LOSSMODEL_HPP

#include "qat/assemblage.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace qat {

enum class ModelId { M0, M1, M2, M3 };

std::string to_string(ModelId m);
/// Accepts "m0".."m3" in either case.
ModelId parse_model(std::string_view s);

/// Positive/negative detector offsets f_+(gamma), f_-(gamma).
struct Offsets {
  double plus;
  double minus;
};

Offsets offset(double gamma);

/// Per-setting efficiencies and biases.
struct LossParams {
  std::vector<double> eps;
  std::vector<double> gamma;

  Index settings() const { return static_cast<Index>(eps.size()); }

  /// eps in (0, 1] and |gamma| <= 1 - eps (+ tol) for every setting.
  bool valid(double tol = 1e-12) const;
  /// Throws std::invalid_argument describing the first violation.
  void validate(double tol = 1e-12) const;

  static LossParams lossless(Index m) { return {std::vector<double>(static_cast<std::size_t>(m), 1.0),
                                                std::vector<double>(static_cast<std::size_t>(m), 0.0)}; }
  static LossParams uniform(Index m, double eps, double gamma = 0.0) {
    return {std::vector<double>(static_cast<std::size_t>(m), eps),
            std::vector<double>(static_cast<std::size_t>(m), gamma)};
  }
};

/// Multiplicative scale applied to the lossless + and - elements of setting x.
inline double plus_scale(double eps, double gamma) { return eps + offset(gamma).plus; }
inline double minus_scale(double eps, double gamma) { return eps + offset(gamma).minus; }

/// Maps a lossless two-outcome assemblage onto the observed three-outcome one:
///   s~_{+-|x} = (eps_x + f_+-(gamma_x)) s_{+-|x}
///   s~_{0|x}  = rho_B - s~_{+|x} - s~_{-|x}
Assemblage observed_elements(const Assemblage& ideal, const LossParams& params);

/// Number of free parameters per model. The canonical three-setting qubit
/// scenario with three analysis bases is tabulated; other scenarios follow
/// the same pattern (M1 = m * 3 * bob_settings, M2 = M1 + m, M3 = M2 + m) and
/// M0 is only defined for the canonical case.
int param_count(ModelId model, Index m, Index dim, Index bob_settings);

}  // namespace qat

#endif  // QAT_LOSSMODEL_HPP
