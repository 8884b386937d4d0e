#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>

#include "hsl/error.hpp"
#include "hsl/matrix.hpp"
#include "hsl/parallel.hpp"
#include "hsl/rng.hpp"

using namespace hsl;

TEST(Matrix, MultiplyByHand) {
  const auto a = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
  const auto b = Matrix::from_rows({{1, 0, 2}, {0, 1, 3}});
  const auto c = multiply(a, b);
  EXPECT_EQ(c, Matrix::from_rows({{1, 2, 8}, {3, 4, 18}, {5, 6, 28}}));
  EXPECT_THROW(multiply(a, a), ContractViolation);
}

TEST(Matrix, FromRowsRejectsRaggedInput) {
  EXPECT_THROW(Matrix::from_rows({{1, 2}, {3}}), ContractViolation);
}

TEST(Matrix, IdentityAndFiniteness) {
  auto m = Matrix::identity(3);
  EXPECT_EQ(m(1, 1), 1.0);
  EXPECT_EQ(m(1, 2), 0.0);
  EXPECT_TRUE(all_finite(m));
  m(2, 0) = std::nan("");
  EXPECT_FALSE(all_finite(m));
}

TEST(MixingMatrix, ValidatesRowStochasticity) {
  EXPECT_NO_THROW(MixingMatrix(Matrix::from_rows({{0.5, 0.5}, {0.0, 1.0}})));
  EXPECT_THROW(MixingMatrix(Matrix::from_rows({{0.5, 0.4}, {0.0, 1.0}})), ContractViolation);
  EXPECT_THROW(MixingMatrix(Matrix::from_rows({{1.5, -0.5}, {0.0, 1.0}})), ContractViolation);
  EXPECT_FALSE(is_row_stochastic(Matrix::from_rows({{0.5, 0.5 + 1e-9}})));
}

TEST(MixingMatrix, ApplyAndCounts) {
  const MixingMatrix w(Matrix::from_rows({{0.5, 0.5, 0.0}, {0.0, 0.0, 1.0}}));
  const auto x = Matrix::from_rows({{2, 0}, {4, 2}, {8, 8}});
  EXPECT_EQ(w.apply(x), Matrix::from_rows({{3, 1}, {8, 8}}));
  EXPECT_EQ(w.nonzeros_in_row(0), 2u);
  EXPECT_EQ(w.nonzeros(), 3u);
  EXPECT_THROW(w.apply(Matrix(2, 2)), ContractViolation);
}

TEST(Rng, DerivedSeedsAreDeterministicAndSeparated) {
  EXPECT_EQ(derive_seed(1, 2, StreamTag::Push, 3), derive_seed(1, 2, StreamTag::Push, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 4; ++m)
    for (std::uint64_t r = 0; r < 8; ++r)
      for (auto tag : {StreamTag::Push, StreamTag::Gossip, StreamTag::Pull, StreamTag::LocalSgd})
        for (std::uint64_t i = 0; i < 8; ++i) seen.insert(derive_seed(m, r, tag, i));
  EXPECT_EQ(seen.size(), 4u * 8u * 4u * 8u);
}

TEST(Rng, ChildStreamsReproduce) {
  auto a = Rng::child(5, 1, StreamTag::Gossip, 2);
  auto b = Rng::child(5, 1, StreamTag::Gossip, 2);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, SampleWithoutReplacementIsDistinctAndUniform) {
  Rng rng(9);
  const std::size_t n = 7, k = 3, trials = 70000;
  std::vector<double> counts(n);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto s = rng.sample_without_replacement(n, k);
    ASSERT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), k);
    for (auto v : s) counts[v] += 1;
  }
  const double p = static_cast<double>(k) / n;
  const double sd = std::sqrt(trials * p * (1 - p));
  for (double c : counts) EXPECT_NEAR(c, trials * p, 4.5 * sd);
}

TEST(Rng, SampleExcludingNeverReturnsExcluded) {
  Rng rng(10);
  for (int t = 0; t < 2000; ++t) {
    const auto s = rng.sample_without_replacement_excluding(6, 5, 2);
    EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()), (std::set<std::size_t>{0, 1, 3, 4, 5}));
  }
  EXPECT_THROW(rng.sample_without_replacement(3, 4), ContractViolation);
}

TEST(Rng, UniformIndexCoversRange) {
  Rng rng(11);
  std::vector<int> hit(5);
  for (int i = 0; i < 1000; ++i) hit[rng.uniform_index(5)]++;
  for (int h : hit) EXPECT_GT(h, 100);
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> visits(1000);
  parallel_for(visits.size(), [&](std::size_t i) { visits[i]++; });
  for (auto& v : visits) EXPECT_EQ(v.load(), 1);
}

TEST(Parallel, RethrowsBodyException) {
  EXPECT_THROW(parallel_for(100,
                            [](std::size_t i) {
                              if (i == 57) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Parallel, EnvironmentCapsWorkers) {
  ::setenv(kThreadsEnvVar, "1", 1);
  EXPECT_EQ(worker_count(), 1u);
  ::unsetenv(kThreadsEnvVar);
  EXPECT_GE(worker_count(), 1u);
}
