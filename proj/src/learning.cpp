#include "hsl/learning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "hsl/error.hpp"
#include "hsl/parallel.hpp"

namespace hsl {

void TrainConfig::validate() const {
  topology.validate();
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
  if (local_steps < 1) throw ConfigError("local_steps must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (!step.derived && !(step.value >= 0.0 && std::isfinite(step.value))) {
    throw ConfigError("step_size must be a finite value >= 0 or 'derived'");
  }
  if (step.derived && topology.kind != TopologyKind::Hsl) {
    throw ConfigError("step_size = derived requires an hsl topology");
  }
  if (!std::isfinite(x0)) throw ConfigError("x0 must be finite");
}

LocalSgdResult local_sgd(std::span<const double> x, const Objective& objective, std::size_t node,
                         std::size_t steps, double eta, std::size_t batch, Rng& rng) {
  if (steps < 1) throw ConfigError("local_sgd: steps must be >= 1");
  if (!(eta >= 0.0)) throw ConfigError("local_sgd: eta must be >= 0");
  if (batch < 1) throw ConfigError("local_sgd: batch must be >= 1");
  const std::size_t m = objective.shard_size(node);
  if (m == 0) throw ConfigError("local_sgd: node " + std::to_string(node) + " has no data");

  const bool exact = batch >= m;
  LocalSgdResult result{{x.begin(), x.end()}, {node, {}, !exact}};
  std::vector<double> g(objective.dim());
  std::vector<std::size_t> indices(exact ? 0 : batch);
  for (std::size_t s = 0; s < steps; ++s) {
    if (exact) {
      objective.local_gradient(node, result.x, g);
    } else {
      for (auto& r : indices) r = rng.uniform_index(m);
      objective.batch_gradient(node, result.x, indices, g);
    }
    if (s == 0) result.first_gradient.vector = g;
    for (std::size_t j = 0; j < g.size(); ++j) result.x[j] -= eta * g[j];
  }
  return result;
}

std::vector<std::vector<std::size_t>> partition_dirichlet(std::span<const int> labels,
                                                          std::size_t n_s, double alpha,
                                                          Rng& rng) {
  if (labels.empty()) throw ConfigError("partition: dataset is empty");
  if (n_s < 1) throw ConfigError("partition: n_s must be >= 1");
  if (!(alpha > 0.0)) throw ConfigError("partition: alpha must be > 0");
  if (labels.size() < n_s) throw ConfigError("partition: fewer samples than nodes");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  std::vector<std::vector<std::size_t>> parts(n_s);
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> weights(n_s);
  for (const auto& [label, members] : by_class) {
    double total = 0.0;
    for (double& w : weights) total += (w = gamma(rng));
    if (!(total > 0.0)) {
      // Every gamma draw underflowed (tiny alpha): the class goes to one node.
      std::fill(weights.begin(), weights.end(), 0.0);
      weights[rng.uniform_index(n_s)] = 1.0;
    }
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    for (std::size_t idx : members) parts[pick(rng)].push_back(idx);
  }

  for (auto& part : parts) {
    if (!part.empty()) continue;
    auto largest = std::max_element(parts.begin(), parts.end(),
                                     [](const auto& a, const auto& b) { return a.size() < b.size(); });
    part.push_back(largest->back());
    largest->pop_back();
  }
  for (auto& part : parts) std::sort(part.begin(), part.end());
  return parts;
}

Evaluation evaluate(const ModelMatrix& x, const Objective& objective) {
  if (x.cols() != objective.dim() || x.rows() != objective.nodes()) {
    throw ContractViolation("evaluate: model matrix shape does not match the objective");
  }
  const std::size_t n = x.rows();
  Evaluation e;
  e.mean_loss = objective.global_loss(row_mean(x));
  e.node_loss.resize(n);
  std::vector<double> grad_sq(n);
  std::vector<std::optional<double>> acc(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> g(objective.dim());
    objective.global_gradient(x.row(i), g);
    double s = 0.0;
    for (double v : g) s += v * v;
    grad_sq[i] = s;
    e.node_loss[i] = objective.global_loss(x.row(i));
    acc[i] = objective.test_accuracy(x.row(i));
  });
  double sum = 0.0;
  for (double v : grad_sq) sum += v;
  e.mean_grad_norm_sq = sum / static_cast<double>(n);
  if (acc.front()) {
    double total = 0.0;
    for (const auto& a : acc) {
      e.node_accuracy.push_back(*a);
      total += *a;
    }
    e.accuracy = total / static_cast<double>(n);
  }
  return e;
}

ProblemConstants derive_problem_constants(const TrainConfig& config, const Objective& objective) {
  ProblemConstants c;
  c.T = config.rounds;
  c.n_s = config.topology.n_s;
  c.L = config.constants.L.value_or(objective.smoothness());

  std::size_t largest_shard = 0;
  for (std::size_t i = 0; i < objective.nodes(); ++i) {
    largest_shard = std::max(largest_shard, objective.shard_size(i));
  }
  if (config.constants.sigma_sq) {
    c.sigma_sq = *config.constants.sigma_sq;
  } else if (config.batch_size >= largest_shard) {
    c.sigma_sq = 0.0;  // every step uses the exact local gradient
  } else {
    throw ConfigError("derived step size: sigma_sq must be given for mini-batch training");
  }

  if (config.constants.H_sq) {
    c.H_sq = *config.constants.H_sq;
  } else if (auto h = objective.heterogeneity_sup()) {
    c.H_sq = *h;
  } else {
    throw ConfigError("derived step size: H_sq must be given for this objective");
  }

  if (config.constants.delta0) {
    c.delta0 = *config.constants.delta0;
  } else if (auto min_loss = objective.min_global_loss()) {
    const std::vector<double> x0(objective.dim(), config.x0);
    c.delta0 = std::max(0.0, objective.global_loss(x0) - *min_loss);
  } else {
    throw ConfigError("derived step size: delta0 must be given for this objective");
  }
  return c;
}

double resolve_step_size(const TrainConfig& config, const Objective& objective) {
  if (!config.step.derived) return config.step.value;
  const auto& t = config.topology;
  return derived_step_size(derive_problem_constants(config, objective),
                            beta_bounds(t.n_s, t.n_h, t.b_hs, t.b_hh, t.b_sh));
}

RunResult run_experiment(const TrainConfig& config, const Objective& objective) {
  config.validate();
  const std::size_t n = config.topology.n_s;
  if (objective.nodes() != n) {
    throw ConfigError("objective has " + std::to_string(objective.nodes()) +
                      " nodes but the topology has n_s = " + std::to_string(n));
  }
  const std::size_t d = objective.dim();

  RunResult result;
  result.step_size = resolve_step_size(config, objective);
  result.metrics.reserve(config.rounds);
  ModelMatrix x(n, d, config.x0);

  for (std::size_t t = 0; t < config.rounds; ++t) {
    ModelMatrix local(n, d);
    parallel_for(n, [&](std::size_t i) {
      auto rng = Rng::child(config.seed, t, StreamTag::LocalSgd, i);
      auto step = local_sgd(x.row(i), objective, i, config.local_steps, result.step_size,
                            config.batch_size, rng);
      std::copy(step.x.begin(), step.x.end(), local.row(i).begin());
    });
    if (!all_finite(local)) {
      throw DivergenceError(t, "non-finite model after local steps in round " + std::to_string(t));
    }

    RoundMetrics m;
    m.round = t;
    m.cd_pre = consensus_distance(local);
    if (config.topology.kind == TopologyKind::Hsl) {
      const auto stages = sample_hsl_round(config.topology, config.seed, t);
      x = stages.pull.apply(stages.gossip.apply(stages.push.apply(local)));
    } else {
      x = sample_effective(config.topology, config.seed, t).apply(local);
    }
    if (!all_finite(x)) {
      throw DivergenceError(t, "non-finite model after mixing in round " + std::to_string(t));
    }
    m.cd_post = consensus_distance(x);
    m.cdr = consensus_distance_ratio(m.cd_pre, m.cd_post);

    if ((t + 1) % config.eval_every == 0 || t + 1 == config.rounds) {
      const auto e = evaluate(x, objective);
      m.mean_loss = e.mean_loss;
      m.mean_grad_norm_sq = e.mean_grad_norm_sq;
      m.accuracy = e.accuracy;
      result.max_heterogeneity_sq =
          std::max(result.max_heterogeneity_sq, objective.heterogeneity_sq(row_mean(x)));
    }
    result.metrics.push_back(m);
  }
  result.final_models = std::move(x);
  return result;
}

ConsensusBoundReport check_consensus_bound(std::span<const RoundMetrics> metrics, double bound,
                          std::size_t burn_in) {
  ConsensusBoundReport r;
  r.bound = bound;
  for (const auto& m : metrics) {
    if (m.round < burn_in) continue;
    ++r.rounds_checked;
    const double pairwise = 2.0 * m.cd_post;
    const double ratio = bound > 0.0 ? pairwise / bound : (pairwise > 0.0 ? INFINITY : 0.0);
    r.worst_ratio = std::max(r.worst_ratio, ratio);
    if (pairwise > bound) {
      ++r.violations;
      if (!r.first_violation) r.first_violation = m.round;
    }
  }
  return r;
}

Quantiles quantiles(std::vector<double> values) {
  if (values.empty()) throw ContractViolation("quantiles: no values");
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

}  // namespace hsl
