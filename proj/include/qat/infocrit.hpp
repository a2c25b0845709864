#ifndef QAT_INFOCRIT_HPP
#define QAT_INFOCRIT_HPP

#include "qat/assemblage.hpp"

#include <cstdint>
#include <vector>

namespace qat {

/// Joint counts N(b|y)|_{a|x}; indices (x, a, y, b).
class CountTensor {
 public:
  CountTensor() = default;
  CountTensor(Index alice_settings, Index alice_outcomes, Index bob_settings, Index bob_outcomes);

  Index alice_settings() const { return m_; }
  Index alice_outcomes() const { return na_; }
  Index bob_settings() const { return mb_; }
  Index bob_outcomes() const { return nb_; }
  Index cells() const { return m_ * na_ * mb_ * nb_; }

  std::int64_t operator()(Index x, Index a, Index y, Index b) const { return counts_[offset(x, a, y, b)]; }
  void set(Index x, Index a, Index y, Index b, std::int64_t value);

  std::int64_t total() const { return total_; }
  /// Sum over (a, b) for fixed (x, y).
  std::int64_t block_total(Index x, Index y) const;
  /// Sum over (a, y, b) for fixed x.
  std::int64_t setting_total(Index x) const;
  /// Sum over (y, b) for fixed (x, a).
  std::int64_t outcome_total(Index x, Index a) const;

  bool operator==(const CountTensor& o) const;

 private:
  std::size_t offset(Index x, Index a, Index y, Index b) const;
  Index m_ = 0, na_ = 0, mb_ = 0, nb_ = 0;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

/// Sum of N log Tr(E_{b|y} sigma_{a|x}); zero counts contribute nothing and a
/// positive count on a non-positive probability yields -infinity.
double log_likelihood(const CountTensor& data, const Assemblage& model, const MeasurementSet& bob);

/// Log-likelihood of the per-(x, y) empirical frequencies (unconstrained multinomial).
double empirical_log_likelihood(const CountTensor& data);

double aic(double log_l, int p);
std::vector<double> delta_aic(const std::vector<double>& values);
/// AIC + (2p^2 + 2p)/(n - p - 1); requires n > p + 1.
double aicc(double aic_value, int p, std::int64_t n);
/// exp(-delta/2).
double relative_likelihood(double delta);

}  // namespace qat

#endif  // QAT_INFOCRIT_HPP
