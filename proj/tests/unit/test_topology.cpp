#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "hsl/error.hpp"
#include "hsl/topology.hpp"

using namespace hsl;

namespace {

std::size_t offdiag_in_column(const MixingMatrix& w, std::size_t j) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < w.rows(); ++i) c += (i != j && w(i, j) > 0.0) ? 1 : 0;
  return c;
}

// sum_k sum_l a(i,k) b(k,l) c(l,j), written out directly.
Matrix triple_product(const Matrix& a, const Matrix& b, const Matrix& c) {
  Matrix out(a.rows(), c.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j)
      for (std::size_t k = 0; k < a.cols(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) out(i, j) += a(i, k) * b(k, l) * c(l, j);
  return out;
}

}  // namespace

TEST(Push, EachHubAveragesExactlyBudgetDistinctSpokes) {
  Rng rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const auto w = sample_push_matrix(12, 4, 5, rng);
    ASSERT_EQ(w.rows(), 4u);
    ASSERT_EQ(w.cols(), 12u);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      EXPECT_EQ(w.nonzeros_in_row(i), 5u);
      for (std::size_t j = 0; j < w.cols(); ++j) {
        if (w(i, j) != 0.0) {
          EXPECT_DOUBLE_EQ(w(i, j), 0.2);
        }
      }
    }
  }
}

TEST(Push, InclusionMarginalIsBudgetOverSpokes) {
  const std::size_t n_s = 10, n_h = 3, b = 4, trials = 20000;
  std::vector<double> hits(n_h * n_s);
  for (std::size_t t = 0; t < trials; ++t) {
    auto rng = Rng::child(7, t, StreamTag::Push, 0);
    const auto w = sample_push_matrix(n_s, n_h, b, rng);
    for (std::size_t i = 0; i < n_h; ++i)
      for (std::size_t j = 0; j < n_s; ++j) hits[i * n_s + j] += w(i, j) > 0.0;
  }
  const double p = 0.4;
  const double sd = std::sqrt(p * (1 - p) / trials);
  for (double h : hits) EXPECT_NEAR(h / trials, p, 4.5 * sd);
}

TEST(Pull, EachSpokeAveragesExactlyBudgetDistinctHubs) {
  Rng rng(2);
  const auto w = sample_pull_matrix(30, 6, 2, rng);
  ASSERT_EQ(w.rows(), 30u);
  ASSERT_EQ(w.cols(), 6u);
  for (std::size_t i = 0; i < w.rows(); ++i) EXPECT_EQ(w.nonzeros_in_row(i), 2u);
}

TEST(Pull, FullBudgetIsUniform) {
  Rng rng(3);
  const auto w = sample_pull_matrix(8, 4, 4, rng);
  for (double v : w.dense().values()) EXPECT_EQ(v, 0.25);
}

TEST(Gossip, EverySenderReachesExactlyBudgetOthers) {
  Rng rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    const auto w = sample_gossip_matrix(9, 3, rng);
    for (std::size_t j = 0; j < 9; ++j) {
      EXPECT_GT(w(j, j), 0.0);
      EXPECT_EQ(offdiag_in_column(w, j), 3u);
    }
  }
}

TEST(Gossip, ReceiverWeightsAreUniformOverSelfAndSenders) {
  Rng rng(5);
  const auto w = sample_gossip_matrix(15, 2, rng);
  for (std::size_t i = 0; i < 15; ++i) {
    const double expected = 1.0 / static_cast<double>(w.nonzeros_in_row(i));
    for (std::size_t j = 0; j < 15; ++j) {
      if (w(i, j) != 0.0) {
        EXPECT_DOUBLE_EQ(w(i, j), expected);
      }
    }
  }
  EXPECT_EQ(w.nonzeros(), 15u + 15u * 2u);
}

TEST(Gossip, FullBudgetIsUniform) {
  Rng rng(6);
  const auto w = sample_gossip_matrix(5, 4, rng);
  for (double v : w.dense().values()) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(Gossip, RejectsOutOfRangeBudget) {
  Rng rng(7);
  EXPECT_THROW(sample_gossip_matrix(5, 5, rng), ConfigError);
  EXPECT_THROW(sample_gossip_matrix(5, 0, rng), ConfigError);
  EXPECT_THROW(sample_gossip_matrix(1, 1, rng), ConfigError);
  EXPECT_THROW(sample_push_matrix(5, 2, 6, rng), ConfigError);
  EXPECT_THROW(sample_pull_matrix(5, 2, 3, rng), ConfigError);
}

TEST(Compose, MatchesDirectTripleProduct) {
  const auto config = TopologyConfig::hsl(20, 5, 3, 2, 2);
  for (std::uint64_t r = 0; r < 10; ++r) {
    const auto stages = sample_hsl_round(config, 11, r);
    const auto eff = compose_effective(stages.pull, stages.gossip, stages.push);
    const auto naive =
        triple_product(stages.pull.dense(), stages.gossip.dense(), stages.push.dense());
    ASSERT_EQ(eff.rows(), 20u);
    ASSERT_EQ(eff.cols(), 20u);
    for (std::size_t i = 0; i < 20; ++i)
      for (std::size_t j = 0; j < 20; ++j) EXPECT_NEAR(eff(i, j), naive(i, j), 1e-15);
    EXPECT_TRUE(is_row_stochastic(eff.dense()));
  }
}

TEST(Compose, RejectsMismatchedShapes) {
  Rng rng(8);
  const auto push = sample_push_matrix(10, 4, 2, rng);
  const auto gossip = sample_gossip_matrix(3, 1, rng);
  const auto pull = sample_pull_matrix(10, 4, 2, rng);
  EXPECT_THROW(compose_effective(pull, gossip, push), ContractViolation);
}

TEST(Rounds, SameSeedAndRoundGiveTheSameMatrix) {
  const auto config = TopologyConfig::hsl(100, 5, 2, 2, 2);
  EXPECT_EQ(sample_effective(config, 3, 17).dense(), sample_effective(config, 3, 17).dense());
  EXPECT_NE(sample_effective(config, 3, 17).dense(), sample_effective(config, 3, 18).dense());
  EXPECT_NE(sample_effective(config, 3, 17).dense(), sample_effective(config, 4, 17).dense());
}

TEST(Baselines, ElLocalHasGossipStructure) {
  const auto w = sample_effective(TopologyConfig::el_local(30, 4), 9, 0);
  for (std::size_t j = 0; j < 30; ++j) EXPECT_EQ(offdiag_in_column(w, j), 4u);
}

TEST(Baselines, ElOracleIsRegularWithoutSelfLoops) {
  for (std::size_t k : {1u, 4u, 10u}) {
    for (std::uint64_t r = 0; r < 5; ++r) {
      const auto w = sample_effective(TopologyConfig::el_oracle(100, k), 10, r);
      for (std::size_t i = 0; i < 100; ++i) {
        EXPECT_EQ(w.nonzeros_in_row(i), k + 1);
        EXPECT_EQ(offdiag_in_column(w, i), k);
        EXPECT_DOUBLE_EQ(w(i, i), 1.0 / static_cast<double>(k + 1));
      }
    }
  }
}

TEST(Baselines, ElOracleCompleteGraph) {
  const auto w = sample_effective(TopologyConfig::el_oracle(6, 5), 1, 0);
  for (double v : w.dense().values()) EXPECT_DOUBLE_EQ(v, 1.0 / 6.0);
}

TEST(Baselines, ErdosRenyiEdgeFrequencyMatchesP) {
  const std::size_t n = 40;
  const double p = 0.1;
  double edges = 0.0;
  const int rounds = 200;
  for (int r = 0; r < rounds; ++r) {
    const auto w = sample_effective(TopologyConfig::erdos_renyi(n, p), 12, r);
    edges += static_cast<double>(w.nonzeros() - n);
  }
  const double pairs = static_cast<double>(rounds * n * (n - 1));
  const double sd = std::sqrt(p * (1 - p) / pairs);
  EXPECT_NEAR(edges / pairs, p, 4 * sd);
}

TEST(Baselines, ErdosRenyiIsolatedReceiverKeepsItsModel) {
  // With tiny p nearly every row is isolated; those rows must be identity rows.
  const auto w = sample_effective(TopologyConfig::erdos_renyi(50, 1e-6), 13, 0);
  for (std::size_t i = 0; i < 50; ++i) {
    if (w.nonzeros_in_row(i) == 1) {
      EXPECT_EQ(w(i, i), 1.0);
    }
  }
  EXPECT_TRUE(is_row_stochastic(w.dense()));
}

TEST(Baselines, TorusIsSymmetricFivePointStencil) {
  const auto w = sample_effective(TopologyConfig::torus(100), 0, 0);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(w.nonzeros_in_row(i), 5u);
    EXPECT_DOUBLE_EQ(w(i, i), 0.2);
    for (std::size_t j = 0; j < 100; ++j) EXPECT_EQ(w(i, j), w(j, i));
  }
  // Node (0,0) wraps to (9,0), (1,0), (0,9), (0,1).
  for (std::size_t j : {90u, 10u, 9u, 1u}) EXPECT_DOUBLE_EQ(w(0, j), 0.2);
  EXPECT_THROW(TopologyConfig::torus(10).validate(), ConfigError);
}

TEST(Baselines, FedAvgIsExactAverage) {
  const auto w = sample_effective(TopologyConfig::fedavg_star(7), 0, 0);
  for (double v : w.dense().values()) EXPECT_EQ(v, 1.0 / 7.0);
}

TEST(Edges, CountsMatchBudgets) {
  EXPECT_EQ(total_edges(TopologyConfig::hsl(100, 5, 2, 2, 2)), 220u);
  EXPECT_EQ(total_edges(TopologyConfig::hsl(100, 5, 10, 2, 2)), 260u);
  EXPECT_EQ(total_edges(TopologyConfig::el_local(100, 10)), 1000u);
  EXPECT_EQ(total_edges(TopologyConfig::el_local(100, 4)), 400u);
  EXPECT_EQ(total_edges(TopologyConfig::el_oracle(100, 4)), 400u);
  EXPECT_EQ(total_edges(TopologyConfig::fedavg_star(100)), 200u);
  EXPECT_EQ(total_edges(TopologyConfig::torus(100)), 400u);
  EXPECT_EQ(total_edges(TopologyConfig::erdos_renyi(100, 400.0 / 9900.0)), 400u);
}

TEST(Validate, NamesTheViolatedConstraint) {
  try {
    TopologyConfig::hsl(100, 5, 2, 5, 2).validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("b_hh"), std::string::npos);
  }
  EXPECT_THROW(TopologyConfig::hsl(100, 5, 101, 2, 2).validate(), ConfigError);
  EXPECT_THROW(TopologyConfig::hsl(100, 5, 2, 2, 6).validate(), ConfigError);
  EXPECT_THROW(TopologyConfig::hsl(100, 1, 2, 1, 1).validate(), ConfigError);
  EXPECT_THROW(TopologyConfig::el_local(100, 100).validate(), ConfigError);
  EXPECT_THROW(TopologyConfig::erdos_renyi(100, 0.0).validate(), ConfigError);
  EXPECT_NO_THROW(TopologyConfig::hsl(100, 5, 100, 4, 5).validate());
}

TEST(Label, ReadableTuples) {
  EXPECT_EQ(TopologyConfig::hsl(100, 5, 2, 2, 2).label(), "hsl(100,5,2,2,2)");
  EXPECT_EQ(TopologyConfig::el_local(100, 10).label(), "el_local(100,10)");
  EXPECT_EQ(parse_topology_kind("erdos_renyi"), TopologyKind::ErdosRenyi);
  EXPECT_THROW(parse_topology_kind("ring"), ConfigError);
}
