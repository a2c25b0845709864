#include "qat/infocrit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qat {

CountTensor::CountTensor(Index alice_settings, Index alice_outcomes, Index bob_settings, Index bob_outcomes)
    : m_(alice_settings), na_(alice_outcomes), mb_(bob_settings), nb_(bob_outcomes) {
  if (m_ < 1 || na_ < 1 || mb_ < 1 || nb_ < 1) throw std::invalid_argument("CountTensor: empty shape");
  counts_.assign(static_cast<std::size_t>(cells()), 0);
}

std::size_t CountTensor::offset(Index x, Index a, Index y, Index b) const {
  if (x < 0 || x >= m_ || a < 0 || a >= na_ || y < 0 || y >= mb_ || b < 0 || b >= nb_)
    throw std::out_of_range("CountTensor: index out of range");
  return static_cast<std::size_t>(((x * na_ + a) * mb_ + y) * nb_ + b);
}

void CountTensor::set(Index x, Index a, Index y, Index b, std::int64_t value) {
  if (value < 0) throw std::invalid_argument("CountTensor: negative count");
  auto& slot = counts_[offset(x, a, y, b)];
  total_ += value - slot;
  slot = value;
}

std::int64_t CountTensor::block_total(Index x, Index y) const {
  std::int64_t s = 0;
  for (Index a = 0; a < na_; ++a)
    for (Index b = 0; b < nb_; ++b) s += (*this)(x, a, y, b);
  return s;
}

std::int64_t CountTensor::setting_total(Index x) const {
  std::int64_t s = 0;
  for (Index y = 0; y < mb_; ++y) s += block_total(x, y);
  return s;
}

std::int64_t CountTensor::outcome_total(Index x, Index a) const {
  std::int64_t s = 0;
  for (Index y = 0; y < mb_; ++y)
    for (Index b = 0; b < nb_; ++b) s += (*this)(x, a, y, b);
  return s;
}

bool CountTensor::operator==(const CountTensor& o) const {
  return m_ == o.m_ && na_ == o.na_ && mb_ == o.mb_ && nb_ == o.nb_ && counts_ == o.counts_;
}

double log_likelihood(const CountTensor& data, const Assemblage& model, const MeasurementSet& bob) {
  if (model.settings() != data.alice_settings() || model.outcomes() != data.alice_outcomes())
    throw std::invalid_argument("log_likelihood: assemblage shape does not match counts");
  if (bob.settings() != data.bob_settings() || bob.outcomes() != data.bob_outcomes())
    throw std::invalid_argument("log_likelihood: Bob's measurements do not match counts");
  if (bob.dim() != model.dim()) throw std::invalid_argument("log_likelihood: dimension mismatch");
  double acc = 0.0;
  for (Index x = 0; x < data.alice_settings(); ++x)
    for (Index a = 0; a < data.alice_outcomes(); ++a)
      for (Index y = 0; y < data.bob_settings(); ++y)
        for (Index b = 0; b < data.bob_outcomes(); ++b) {
          const auto n = data(x, a, y, b);
          if (n == 0) continue;
          const double p = trace_product(bob(b, y), model(a, x));
          if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
          acc += static_cast<double>(n) * std::log(p);
        }
  return acc;
}

double empirical_log_likelihood(const CountTensor& data) {
  double acc = 0.0;
  for (Index x = 0; x < data.alice_settings(); ++x)
    for (Index y = 0; y < data.bob_settings(); ++y) {
      const auto block = data.block_total(x, y);
      if (block == 0) continue;
      for (Index a = 0; a < data.alice_outcomes(); ++a)
        for (Index b = 0; b < data.bob_outcomes(); ++b) {
          const auto n = data(x, a, y, b);
          if (n > 0) acc += static_cast<double>(n) * std::log(static_cast<double>(n) / static_cast<double>(block));
        }
    }
  return acc;
}

double aic(double log_l, int p) { return -2.0 * log_l + 2.0 * p; }

std::vector<double> delta_aic(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("delta_aic: empty list");
  const double lo = *std::min_element(values.begin(), values.end());
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(v - lo);
  return out;
}

double aicc(double aic_value, int p, std::int64_t n) {
  if (n <= static_cast<std::int64_t>(p) + 1)
    throw std::domain_error("aicc: sample size must exceed p + 1");
  const double pd = p;
  return aic_value + (2.0 * pd * pd + 2.0 * pd) / static_cast<double>(n - p - 1);
}

double relative_likelihood(double delta) { return std::exp(-delta / 2.0); }

}  // namespace qat
