#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "hsl/bounds.hpp"
#include "hsl/error.hpp"
#include "hsl/learning.hpp"
#include "hsl/metrics.hpp"

using namespace hsl;

namespace {

QuadraticObjective scalar_quadratic(std::vector<double> targets) {
  std::vector<QuadraticObjective::Shard> shards;
  for (double t : targets) shards.push_back({Matrix::from_rows({{1.0}}), {t}});
  return QuadraticObjective(std::move(shards));
}

TrainConfig base_config(TopologyConfig topology, std::size_t rounds, double eta) {
  TrainConfig c;
  c.topology = topology;
  c.rounds = rounds;
  c.step = {false, eta};
  c.seed = 5;
  return c;
}

template <typename F>
void expect_gradient_matches_finite_difference(const Objective& obj, std::size_t node, F&& x_of) {
  std::vector<double> x = x_of();
  std::vector<double> g(obj.dim());
  obj.local_gradient(node, x, g);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = 1e-6;
    auto up = x, down = x;
    up[j] += h;
    down[j] -= h;
    const double fd = (obj.local_loss(node, up) - obj.local_loss(node, down)) / (2 * h);
    EXPECT_NEAR(g[j], fd, 1e-6 * (1 + std::abs(fd)));
  }
}

}  // namespace

TEST(Quadratic, GradientMatchesFiniteDifference) {
  const auto obj = make_quadratic_objective({4, 3, 5, 0.7, 1.0, false}, 3);
  for (std::size_t i = 0; i < 4; ++i) {
    expect_gradient_matches_finite_difference(obj, i, [] { return std::vector<double>{0.3, -1.2, 2.0}; });
  }
}

TEST(Quadratic, BatchGradientAveragesToFullGradient) {
  const auto obj = make_quadratic_objective({2, 3, 4, 0.5, 1.0, true}, 4);
  const std::vector<double> x{0.5, 0.1, -0.4};
  const std::size_t m = obj.shard_size(1);
  std::vector<double> full(3), acc(3, 0.0), g(3);
  obj.local_gradient(1, x, full);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t batch[] = {r};
    obj.batch_gradient(1, x, batch, g);
    for (std::size_t j = 0; j < 3; ++j) acc[j] += g[j] / static_cast<double>(m);
  }
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(acc[j], full[j], 1e-12);
}

TEST(Quadratic, MinimizerAndHeterogeneity) {
  // f_i = (x - t_i)^2 / 2 with targets 0 and 2: F is minimized at 1 with value 1/2,
  // and every gradient difference is exactly +-1.
  const auto obj = scalar_quadratic({0.0, 2.0});
  EXPECT_NEAR(obj.minimizer()[0], 1.0, 1e-14);
  EXPECT_NEAR(*obj.min_global_loss(), 0.5, 1e-14);
  EXPECT_NEAR(*obj.heterogeneity_sup(), 1.0, 1e-14);
  EXPECT_NEAR(obj.smoothness(), 1.0, 1e-14);
}

TEST(Logistic, GradientMatchesFiniteDifference) {
  const auto obj = make_logistic_objective({5, 3, 200, 50, 1.0, 2.0, 0.1}, 6);
  for (std::size_t i = 0; i < 5; ++i) {
    expect_gradient_matches_finite_difference(obj, i, [] { return std::vector<double>{0.2, -0.3, 0.5, 0.1}; });
  }
  EXPECT_EQ(obj.dim(), 4u);
  std::size_t total = 0;
  for (std::size_t i = 0; i < 5; ++i) total += obj.shard_size(i);
  EXPECT_EQ(total, 200u);
}

TEST(Logistic, AccuracyOfTheSeparatingDirection) {
  const auto obj = make_logistic_objective({1, 2, 100, 2000, 1.0, 6.0, 0.0}, 7);
  // With separation 6 along a unit direction, the Bayes rule has accuracy Phi(3) ~ 0.9987.
  // Recover the direction from class means of the test set.
  const auto& test = obj.test_set();
  std::vector<double> w(3, 0.0);
  for (std::size_t r = 0; r < test.labels.size(); ++r)
    for (std::size_t j = 0; j < 2; ++j) w[j] += (test.labels[r] ? 1.0 : -1.0) * test.features(r, j);
  EXPECT_GT(*obj.test_accuracy(w), 0.99);
  std::vector<double> flipped{-w[0], -w[1], 0.0};
  EXPECT_LT(*obj.test_accuracy(flipped), 0.01);
}

TEST(LocalSgd, FullBatchStepsUnroll) {
  const auto obj = make_quadratic_objective({1, 2, 3, 0.8, 0.0, true}, 8);
  const auto& s = obj.shard(0);
  std::vector<double> x{1.0, -1.0};
  const double eta = 0.05;
  Rng rng(1);
  const auto result = local_sgd(x, obj, 0, 3, eta, 100, rng);
  for (int step = 0; step < 3; ++step) {
    std::vector<double> g(2, 0.0);
    for (std::size_t r = 0; r < s.a.rows(); ++r) {
      const double resid = s.a(r, 0) * x[0] + s.a(r, 1) * x[1] - s.b[r];
      g[0] += s.a(r, 0) * resid;
      g[1] += s.a(r, 1) * resid;
    }
    x[0] -= eta * g[0];
    x[1] -= eta * g[1];
  }
  EXPECT_NEAR(result.x[0], x[0], 1e-14);
  EXPECT_NEAR(result.x[1], x[1], 1e-14);
  EXPECT_FALSE(result.first_gradient.is_stochastic);
}

TEST(LocalSgd, MiniBatchUsesTheStreamForIndices) {
  const auto obj = make_quadratic_objective({1, 2, 6, 0.8, 0.0, true}, 9);
  std::vector<double> x{0.5, 0.5};
  Rng a(42), b(42);
  const auto result = local_sgd(x, obj, 0, 2, 0.1, 2, a);
  for (int step = 0; step < 2; ++step) {
    std::vector<std::size_t> batch{b.uniform_index(8), b.uniform_index(8)};
    std::vector<double> g(2);
    obj.batch_gradient(0, x, batch, g);
    x[0] -= 0.1 * g[0];
    x[1] -= 0.1 * g[1];
  }
  EXPECT_EQ(result.x, x);
  EXPECT_TRUE(result.first_gradient.is_stochastic);
}

TEST(Evaluate, HandWorkedQuadratic) {
  const auto obj = scalar_quadratic({0.0, 2.0});
  const auto e = evaluate(Matrix::from_rows({{0.0}, {2.0}}), obj);
  EXPECT_DOUBLE_EQ(e.mean_loss, 0.5);         // F(1)
  EXPECT_DOUBLE_EQ(e.mean_grad_norm_sq, 1.0);  // (1 + 1) / 2
  EXPECT_EQ(e.node_loss, (std::vector<double>{1.0, 1.0}));
  EXPECT_FALSE(e.accuracy.has_value());
  EXPECT_THROW(evaluate(Matrix(3, 1), obj), ContractViolation);
}

TEST(Dirichlet, PartitionCoversEverySampleOnce) {
  std::vector<int> labels(1000);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 10);
  Rng rng(3);
  const auto parts = partition_dirichlet(labels, 100, 1.0, rng);
  std::set<std::size_t> seen;
  for (const auto& p : parts) {
    EXPECT_FALSE(p.empty());
    for (auto i : p) EXPECT_TRUE(seen.insert(i).second);
  }
  EXPECT_EQ(seen.size(), labels.size());
}

TEST(Dirichlet, AlphaOneGivesSkewedNodes) {
  std::vector<int> labels(5000);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 10);
  auto max_share = [&](double alpha, std::uint64_t seed) {
    Rng rng(seed);
    const auto parts = partition_dirichlet(labels, 100, alpha, rng);
    double total = 0.0;
    for (const auto& p : parts) {
      std::vector<int> count(10);
      for (auto i : p) count[labels[i]]++;
      total += static_cast<double>(*std::max_element(count.begin(), count.end())) /
               static_cast<double>(p.size());
    }
    return total / static_cast<double>(parts.size());
  };
  double skewed = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) skewed += max_share(1.0, s) / 50.0;
  EXPECT_GT(skewed, 0.15);
  // Large alpha approaches the iid split, whose max-class share is much lower.
  EXPECT_LT(max_share(1000.0, 1), skewed);
}

TEST(Dirichlet, RejectsBadInput) {
  Rng rng(1);
  std::vector<int> labels{0, 1};
  EXPECT_THROW(partition_dirichlet(labels, 3, 1.0, rng), ConfigError);
  EXPECT_THROW(partition_dirichlet(labels, 2, 0.0, rng), ConfigError);
}

TEST(Run, HomogeneousQuadraticConverges) {
  // A = I, so L = mu = 1 and each round shrinks the gradient norm by 1 - 1/20.
  const auto obj = make_quadratic_objective({20, 2, 0, 0.0, 0.0, true}, 11);
  auto config = base_config(TopologyConfig::hsl(20, 4, 2, 1, 1), 200, 0.0);
  config.step.value = 1.0 / (20.0 * obj.smoothness());
  config.x0 = 0.0;
  config.batch_size = 1000;  // exact local gradients
  const auto result = run_experiment(config, obj);
  ASSERT_EQ(result.metrics.size(), 200u);
  for (std::size_t t = 1; t < 200; ++t) {
    EXPECT_LE(*result.metrics[t].mean_loss, *result.metrics[t - 1].mean_loss);
  }
  EXPECT_LT(*result.metrics.back().mean_grad_norm_sq, 1e-8);
}

TEST(Run, ZeroStepKeepsTheInitialModel) {
  const auto obj = scalar_quadratic({0.0, 1.0, 2.0, 3.0});
  auto config = base_config(TopologyConfig::hsl(4, 2, 2, 1, 1), 3, 0.0);
  config.x0 = 1.5;
  const auto result = run_experiment(config, obj);
  for (const auto& m : result.metrics) {
    EXPECT_EQ(m.cd_pre, 0.0);
    EXPECT_EQ(m.cd_post, 0.0);
    EXPECT_FALSE(m.cdr.has_value());
  }
  EXPECT_EQ(result.final_models, Matrix(4, 1, 1.5));
}

TEST(Run, FedAvgReachesExactConsensusEveryRound) {
  const auto obj = make_quadratic_objective({10, 3, 2, 0.5, 1.0, false}, 12);
  const auto result = run_experiment(base_config(TopologyConfig::fedavg_star(10), 20, 0.05), obj);
  for (const auto& m : result.metrics) {
    EXPECT_GT(m.cd_pre, 0.0);
    EXPECT_EQ(m.cd_post, 0.0);
    EXPECT_EQ(*m.cdr, 0.0);
  }
}

TEST(Run, EvaluationCadence) {
  const auto obj = scalar_quadratic({0.0, 1.0, 2.0, 3.0});
  auto config = base_config(TopologyConfig::torus(4), 10, 0.1);
  config.eval_every = 4;
  const auto result = run_experiment(config, obj);
  for (const auto& m : result.metrics) {
    const bool evaluated = (m.round + 1) % 4 == 0 || m.round == 9;
    EXPECT_EQ(m.mean_loss.has_value(), evaluated) << m.round;
  }
}

TEST(Run, DivergenceNamesTheRound) {
  const auto obj = scalar_quadratic({0.0, 1.0, 2.0, 3.0});
  auto config = base_config(TopologyConfig::fedavg_star(4), 2000, 1e150);
  config.x0 = 1e150;
  try {
    run_experiment(config, obj);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_LT(e.round(), 5u);
    EXPECT_NE(std::string(e.what()).find("round " + std::to_string(e.round())), std::string::npos);
  }
}

TEST(Run, IsDeterministicPerSeed) {
  const auto obj = make_logistic_objective({20, 4, 400, 100, 1.0, 2.0, 0.05}, 13);
  auto config = base_config(TopologyConfig::hsl(20, 4, 3, 1, 2), 15, 0.1);
  config.batch_size = 4;
  config.local_steps = 2;
  const auto a = run_experiment(config, obj);
  const auto b = run_experiment(config, obj);
  EXPECT_EQ(a.metrics, b.metrics);
  EXPECT_EQ(a.final_models, b.final_models);
  config.seed = 6;
  EXPECT_NE(run_experiment(config, obj).final_models, a.final_models);
}

TEST(Run, RejectsNodeCountMismatch) {
  const auto obj = scalar_quadratic({0.0, 1.0});
  EXPECT_THROW(run_experiment(base_config(TopologyConfig::fedavg_star(3), 1, 0.1), obj),
               ConfigError);
}

TEST(StepSize, DerivedStepResolvesFromObjectiveConstants) {
  const auto obj = make_quadratic_objective({10, 3, 3, 0.5, 0.7, true}, 14);
  auto config = base_config(TopologyConfig::hsl(10, 3, 2, 1, 2), 100, 0.0);
  config.step.derived = true;
  config.batch_size = 1000;  // full batch, so sigma^2 = 0
  config.x0 = 1.0;
  const auto c = derive_problem_constants(config, obj);
  EXPECT_EQ(c.sigma_sq, 0.0);
  EXPECT_NEAR(c.H_sq, *obj.heterogeneity_sup(), 0.0);
  EXPECT_EQ(c.T, 100u);
  const double expected = derived_step_size(c, beta_bounds(10, 3, 2, 1, 2));
  EXPECT_EQ(resolve_step_size(config, obj), expected);
  EXPECT_GT(expected, 0.0);

  config.batch_size = 1;
  EXPECT_THROW(derive_problem_constants(config, obj), ConfigError);
  config.constants.sigma_sq = 0.25;
  EXPECT_EQ(derive_problem_constants(config, obj).sigma_sq, 0.25);
}

TEST(StepSize, DerivedStepNeedsHsl) {
  auto config = base_config(TopologyConfig::el_local(10, 2), 10, 0.0);
  config.step.derived = true;
  EXPECT_THROW(config.validate(), ConfigError);
}

TEST(ConsensusBoundCheck, CountsViolationsAfterBurnIn) {
  std::vector<RoundMetrics> m(5);
  for (std::size_t t = 0; t < 5; ++t) {
    m[t].round = t;
    m[t].cd_post = t == 1 ? 10.0 : (t == 3 ? 0.6 : 0.1);
  }
  const auto r = check_consensus_bound(m, 1.0, 2);
  EXPECT_EQ(r.rounds_checked, 3u);
  EXPECT_EQ(r.violations, 1u);
  EXPECT_EQ(*r.first_violation, 3u);
  EXPECT_DOUBLE_EQ(r.worst_ratio, 1.2);
}

TEST(Quantiles, LinearInterpolation) {
  const auto q = quantiles({4.0, 1.0, 3.0, 2.0, 5.0});
  EXPECT_EQ(q.min, 1.0);
  EXPECT_EQ(q.p25, 2.0);
  EXPECT_EQ(q.p50, 3.0);
  EXPECT_EQ(q.p75, 4.0);
  EXPECT_EQ(q.max, 5.0);
  EXPECT_DOUBLE_EQ(quantiles({0.0, 1.0}).p25, 0.25);
  EXPECT_THROW(quantiles({}), ContractViolation);
}
