#include "hsl/metrics.hpp"

#include <cmath>

namespace hsl {

void CompensatedSum::add(double value) noexcept {
  const double t = sum_ + value;
  if (std::abs(sum_) >= std::abs(value)) {
    compensation_ += (sum_ - t) + value;
  } else {
    compensation_ += (value - t) + sum_;
  }
  sum_ = t;
}

std::vector<double> row_mean(const ModelMatrix& x) {
  std::vector<double> mean(x.cols(), 0.0);
  if (x.rows() == 0) return mean;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    CompensatedSum s;
    for (std::size_t i = 0; i < x.rows(); ++i) s.add(x(i, j));
    mean[j] = s.value() / static_cast<double>(x.rows());
  }
  return mean;
}

double consensus_distance(const ModelMatrix& x) {
  const std::size_t n = x.rows();
  if (n == 0) return 0.0;
  // Work relative to row 0: identical rows give exactly zero, and large common
  // offsets do not eat into the precision of the deviations.
  std::vector<double> shifted_mean(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    CompensatedSum s;
    for (std::size_t i = 0; i < n; ++i) s.add(x(i, j) - x(0, j));
    shifted_mean[j] = s.value() / static_cast<double>(n);
  }
  CompensatedSum total;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double d = (x(i, j) - x(0, j)) - shifted_mean[j];
      total.add(d * d);
    }
  }
  return total.value() / static_cast<double>(n);
}

double pairwise_consensus_distance(const ModelMatrix& x) {
  const std::size_t n = x.rows();
  if (n == 0) return 0.0;
  CompensatedSum total;  // sum over unordered pairs i < j
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      for (std::size_t j = 0; j < x.cols(); ++j) {
        const double d = x(i, j) - x(k, j);
        total.add(d * d);
      }
    }
  }
  const double nn = static_cast<double>(n);
  return total.value() / (nn * nn);
}

std::optional<double> consensus_distance_ratio(double cd_pre, double cd_post) {
  if (cd_pre <= 0.0) return std::nullopt;
  return cd_post / cd_pre;
}

double variance_identity_gap(const ModelMatrix& x) {
  return std::abs(consensus_distance(x) - pairwise_consensus_distance(x));
}

}  // namespace hsl
