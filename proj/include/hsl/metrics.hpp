#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hsl/matrix.hpp"

namespace hsl {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double value) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

std::vector<double> row_mean(const ModelMatrix& x);

/// (1/n) sum_i ||x_i - mean||^2.
double consensus_distance(const ModelMatrix& x);

/// Pairwise form (1 / 2n^2) sum_{i != j} ||x_i - x_j||^2; equals consensus_distance.
double pairwise_consensus_distance(const ModelMatrix& x);

/// cd_post / cd_pre, or nullopt when cd_pre == 0 (already at consensus).
std::optional<double> consensus_distance_ratio(double cd_pre, double cd_post);

/// |consensus_distance(x) - pairwise_consensus_distance(x)|.
double variance_identity_gap(const ModelMatrix& x);

/// One row of metrics.csv.
struct RoundMetrics {
  std::size_t round = 0;
  double cd_pre = 0.0;
  double cd_post = 0.0;
  std::optional<double> cdr;
  std::optional<double> mean_loss;
  std::optional<double> mean_grad_norm_sq;
  std::optional<double> accuracy;
  std::optional<double> spectral_gap;

  bool operator==(const RoundMetrics&) const = default;
};

}  // namespace hsl
