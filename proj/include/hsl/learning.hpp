#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hsl/bounds.hpp"
#include "hsl/matrix.hpp"
#include "hsl/metrics.hpp"
#include "hsl/objective.hpp"
#include "hsl/rng.hpp"
#include "hsl/topology.hpp"

namespace hsl {

/// Either a fixed step size or the step-size rule derived from problem constants.
struct StepSize {
  bool derived = false;
  double value = 0.01;

  bool operator==(const StepSize&) const = default;
};

/// Optional overrides for constants the objective cannot supply analytically.
struct ConstantOverrides {
  std::optional<double> L;
  std::optional<double> sigma_sq;
  std::optional<double> H_sq;
  std::optional<double> delta0;

  bool operator==(const ConstantOverrides&) const = default;
};

struct TrainConfig {
  TopologyConfig topology;
  std::size_t rounds = 1;
  std::size_t local_steps = 1;
  std::size_t batch_size = 1;
  StepSize step;
  ConstantOverrides constants;
  std::uint64_t seed = 0;
  std::size_t eval_every = 1;
  double x0 = 0.0;  ///< every node starts at x0 * ones

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct GradientSample {
  std::size_t node = 0;
  std::vector<double> vector;
  bool is_stochastic = false;
};

struct LocalSgdResult {
  std::vector<double> x;
  GradientSample first_gradient;
};

/// `steps` SGD steps on node `node`. Batches are drawn uniformly with
/// replacement; a batch at least as large as the shard uses the exact gradient.
LocalSgdResult local_sgd(std::span<const double> x, const Objective& objective, std::size_t node,
                         std::size_t steps, double eta, std::size_t batch, Rng& rng);

/// Non-iid split: per class, Dirichlet(alpha) node proportions, then a
/// multinomial assignment of that class's samples. Empty nodes afterwards
/// take one sample from the currently largest node.
std::vector<std::vector<std::size_t>> partition_dirichlet(std::span<const int> labels,
                                                          std::size_t n_s, double alpha, Rng& rng);

struct Evaluation {
  double mean_loss = 0.0;          ///< F(mean of rows)
  double mean_grad_norm_sq = 0.0;  ///< (1/n) sum_i ||grad F(x_i)||^2
  std::optional<double> accuracy;  ///< mean per-node test accuracy
  std::vector<double> node_loss;   ///< F(x_i)
  std::vector<double> node_accuracy;
};

Evaluation evaluate(const ModelMatrix& x, const Objective& objective);

/// Constants for the step-size rule: overrides first, then closed forms from
/// the objective. Throws ConfigError when a constant is unavailable.
ProblemConstants derive_problem_constants(const TrainConfig& config, const Objective& objective);

double resolve_step_size(const TrainConfig& config, const Objective& objective);

struct RunResult {
  std::vector<RoundMetrics> metrics;
  ModelMatrix final_models;
  double step_size = 0.0;
  /// max over evaluated rounds of heterogeneity_sq at the mean model.
  double max_heterogeneity_sq = 0.0;
};

/// Runs local SGD + mixing for config.rounds rounds. All nodes start at x0.
/// Throws DivergenceError naming the first round with a non-finite model.
RunResult run_experiment(const TrainConfig& config, const Objective& objective);

struct ConsensusBoundReport {
  std::size_t rounds_checked = 0;
  std::size_t violations = 0;
  std::optional<std::size_t> first_violation;
  double bound = 0.0;
  double worst_ratio = 0.0;  ///< max pairwise CD / bound over checked rounds
};

/// Compares the pairwise consensus distance 2 * cd_post of every round at or
/// after `burn_in` against `bound`.
ConsensusBoundReport check_consensus_bound(std::span<const RoundMetrics> metrics, double bound,
                          std::size_t burn_in);

struct Quantiles {
  double min = 0.0;
  double p25 = 0.0;
  double p50 = 0.0;
  double p75 = 0.0;
  double max = 0.0;
};

/// Linear-interpolated quantiles; `values` must be nonempty.
Quantiles quantiles(std::vector<double> values);

}  // namespace hsl
