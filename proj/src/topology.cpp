#include "hsl/topology.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "hsl/error.hpp"

namespace hsl {
namespace {

std::string num(std::size_t v) { return std::to_string(v); }

std::size_t torus_side(std::size_t n) {
  auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  return side * side == n ? side : 0;
}

// Row i of a receiver that averages itself with `senders`.
void fill_average_row(Matrix& m, std::size_t i, const std::vector<std::size_t>& senders) {
  const double w = 1.0 / static_cast<double>(senders.size() + 1);
  m(i, i) = w;
  for (std::size_t j : senders) m(i, j) = w;
}

// Rows of a (rows x cols) matrix where each row averages `budget` distinct columns.
MixingMatrix sample_subset_average(std::size_t rows, std::size_t cols, std::size_t budget,
                                   Rng& rng) {
  Matrix m(rows, cols);
  const double w = 1.0 / static_cast<double>(budget);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j : rng.sample_without_replacement(cols, budget)) m(i, j) = w;
  }
  return MixingMatrix(std::move(m));
}

// Superposes k edge-disjoint, loop-free random permutations. Conflicting
// targets are repaired by random swaps within the current permutation; a
// permutation that cannot be repaired within 100 k attempts restarts the graph.
MixingMatrix sample_k_regular(std::size_t n, std::size_t k, Rng& rng) {
  if (k == n - 1) {
    return MixingMatrix(Matrix(n, n, 1.0 / static_cast<double>(n)));
  }
  const std::size_t per_permutation = 100 * k;
  std::size_t total_budget = per_permutation * n;
  std::vector<char> edge(n * n);  // edge[src * n + dst]
  std::vector<std::size_t> perm(n);

  auto valid = [&](std::size_t src, std::size_t dst) { return src != dst && !edge[src * n + dst]; };

  for (;;) {
    std::fill(edge.begin(), edge.end(), 0);
    bool restart = false;
    for (std::size_t round = 0; round < k && !restart; ++round) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      rng.shuffle(std::span<std::size_t>(perm));
      std::size_t attempts = 0;
      for (std::size_t j = 0; j < n && !restart; ++j) {
        while (!valid(j, perm[j])) {
          if (attempts == per_permutation) {
            restart = true;
            break;
          }
          if (total_budget == 0) {
            throw SamplingError("el_oracle: no " + num(k) + "-regular graph on " + num(n) +
                                " nodes within the retry budget");
          }
          ++attempts;
          --total_budget;
          const std::size_t r = rng.uniform_index(n);
          if (valid(j, perm[r]) && valid(r, perm[j])) std::swap(perm[j], perm[r]);
        }
      }
      if (!restart) {
        for (std::size_t j = 0; j < n; ++j) edge[j * n + perm[j]] = 1;
      }
    }
    if (restart) continue;

    Matrix m(n, n);
    std::vector<std::size_t> senders;
    for (std::size_t i = 0; i < n; ++i) {
      senders.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (edge[j * n + i]) senders.push_back(j);
      }
      fill_average_row(m, i, senders);
    }
    return MixingMatrix(std::move(m));
  }
}

MixingMatrix sample_erdos_renyi(std::size_t n, double p, Rng& rng) {
  Matrix m(n, n);
  std::vector<std::size_t> senders;
  for (std::size_t i = 0; i < n; ++i) {
    senders.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && rng.uniform01() < p) senders.push_back(j);
    }
    fill_average_row(m, i, senders);  // isolated receivers keep their own model
  }
  return MixingMatrix(std::move(m));
}

MixingMatrix torus_matrix(std::size_t n) {
  const std::size_t side = torus_side(n);
  Matrix m(n, n);
  for (std::size_t a = 0; a < side; ++a) {
    for (std::size_t b = 0; b < side; ++b) {
      const std::size_t i = a * side + b;
      const std::size_t up = ((a + side - 1) % side) * side + b;
      const std::size_t down = ((a + 1) % side) * side + b;
      const std::size_t left = a * side + (b + side - 1) % side;
      const std::size_t right = a * side + (b + 1) % side;
      for (std::size_t j : {i, up, down, left, right}) m(i, j) += 0.2;
    }
  }
  return MixingMatrix(std::move(m));
}

}  // namespace

std::string_view to_string(TopologyKind kind) noexcept {
  switch (kind) {
    case TopologyKind::Hsl: return "hsl";
    case TopologyKind::ElLocal: return "el_local";
    case TopologyKind::ElOracle: return "el_oracle";
    case TopologyKind::ErdosRenyi: return "erdos_renyi";
    case TopologyKind::Torus: return "torus";
    case TopologyKind::FedAvgStar: return "fedavg_star";
  }
  return "unknown";
}

TopologyKind parse_topology_kind(std::string_view name) {
  for (auto kind : {TopologyKind::Hsl, TopologyKind::ElLocal, TopologyKind::ElOracle,
                    TopologyKind::ErdosRenyi, TopologyKind::Torus, TopologyKind::FedAvgStar}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown topology kind '" + std::string(name) +
                    "' (expected hsl, el_local, el_oracle, erdos_renyi, torus or fedavg_star)");
}

TopologyConfig TopologyConfig::hsl(std::size_t n_s, std::size_t n_h, std::size_t b_hs,
                                   std::size_t b_hh, std::size_t b_sh) {
  return {TopologyKind::Hsl, n_s, n_h, b_hs, b_hh, b_sh, 0, 0.0};
}
TopologyConfig TopologyConfig::el_local(std::size_t n, std::size_t k) {
  return {TopologyKind::ElLocal, n, 0, 0, 0, 0, k, 0.0};
}
TopologyConfig TopologyConfig::el_oracle(std::size_t n, std::size_t k) {
  return {TopologyKind::ElOracle, n, 0, 0, 0, 0, k, 0.0};
}
TopologyConfig TopologyConfig::erdos_renyi(std::size_t n, double p) {
  return {TopologyKind::ErdosRenyi, n, 0, 0, 0, 0, 0, p};
}
TopologyConfig TopologyConfig::torus(std::size_t n) {
  return {TopologyKind::Torus, n, 0, 0, 0, 0, 0, 0.0};
}
TopologyConfig TopologyConfig::fedavg_star(std::size_t n) {
  return {TopologyKind::FedAvgStar, n, 0, 0, 0, 0, 0, 0.0};
}

void TopologyConfig::validate() const {
  if (n_s < 1) throw ConfigError("n_s must be >= 1");
  switch (kind) {
    case TopologyKind::Hsl:
      if (n_s < 2) throw ConfigError("n_s must be >= 2 for hsl");
      if (n_h < 2) throw ConfigError("n_h must be >= 2 for hsl");
      if (b_hs < 1 || b_hs > n_s) throw ConfigError("b_hs must satisfy 1 <= b_hs <= n_s");
      if (b_hh < 1 || b_hh > n_h - 1) throw ConfigError("b_hh must satisfy 1 <= b_hh <= n_h - 1");
      if (b_sh < 1 || b_sh > n_h) throw ConfigError("b_sh must satisfy 1 <= b_sh <= n_h");
      break;
    case TopologyKind::ElLocal:
    case TopologyKind::ElOracle:
      if (n_s < 2) throw ConfigError("n_s must be >= 2 for " + std::string(to_string(kind)));
      if (k < 1 || k > n_s - 1) throw ConfigError("k must satisfy 1 <= k <= n_s - 1");
      break;
    case TopologyKind::ErdosRenyi:
      if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p must satisfy 0 < p <= 1");
      break;
    case TopologyKind::Torus:
      if (torus_side(n_s) == 0) throw ConfigError("n_s must be a perfect square for torus");
      break;
    case TopologyKind::FedAvgStar:
      break;
  }
}

std::string TopologyConfig::label() const {
  std::string out(to_string(kind));
  switch (kind) {
    case TopologyKind::Hsl:
      return out + "(" + num(n_s) + "," + num(n_h) + "," + num(b_hs) + "," + num(b_hh) + "," +
             num(b_sh) + ")";
    case TopologyKind::ElLocal:
    case TopologyKind::ElOracle:
      return out + "(" + num(n_s) + "," + num(k) + ")";
    case TopologyKind::ErdosRenyi: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", p);
      return out + "(" + num(n_s) + "," + buf + ")";
    }
    default:
      return out + "(" + num(n_s) + ")";
  }
}

MixingMatrix sample_push_matrix(std::size_t n_s, std::size_t n_h, std::size_t b_hs, Rng& rng) {
  if (n_h < 1) throw ConfigError("push: n_h must be >= 1");
  if (b_hs < 1 || b_hs > n_s) {
    throw ConfigError("push: b_hs = " + num(b_hs) + " must be in [1, n_s = " + num(n_s) + "]");
  }
  return sample_subset_average(n_h, n_s, b_hs, rng);
}

MixingMatrix sample_gossip_matrix(std::size_t n, std::size_t b, Rng& rng) {
  if (n < 2) throw ConfigError("gossip: n must be >= 2");
  if (b < 1 || b >= n) {
    throw ConfigError("gossip: b = " + num(b) + " must be in [1, n - 1 = " + num(n - 1) + "]");
  }
  std::vector<std::vector<std::size_t>> senders(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t target : rng.sample_without_replacement_excluding(n, b, i)) {
      senders[target].push_back(i);
    }
  }
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) fill_average_row(m, i, senders[i]);
  return MixingMatrix(std::move(m));
}

MixingMatrix sample_pull_matrix(std::size_t n_s, std::size_t n_h, std::size_t b_sh, Rng& rng) {
  if (b_sh < 1 || b_sh > n_h) {
    throw ConfigError("pull: b_sh = " + num(b_sh) + " must be in [1, n_h = " + num(n_h) + "]");
  }
  return sample_subset_average(n_s, n_h, b_sh, rng);
}

MixingMatrix sample_baseline(const TopologyConfig& config, Rng& rng) {
  config.validate();
  const std::size_t n = config.n_s;
  switch (config.kind) {
    case TopologyKind::ElLocal: return sample_gossip_matrix(n, config.k, rng);
    case TopologyKind::ElOracle: return sample_k_regular(n, config.k, rng);
    case TopologyKind::ErdosRenyi: return sample_erdos_renyi(n, config.p, rng);
    case TopologyKind::Torus: return torus_matrix(n);
    case TopologyKind::FedAvgStar:
      return MixingMatrix(Matrix(n, n, 1.0 / static_cast<double>(n)));
    case TopologyKind::Hsl: break;
  }
  throw ContractViolation("sample_baseline: hsl is not a baseline topology");
}

MixingMatrix compose_effective(const MixingMatrix& pull, const MixingMatrix& gossip,
                               const MixingMatrix& push) {
  if (gossip.rows() != gossip.cols() || pull.cols() != gossip.rows() ||
      gossip.cols() != push.rows() || pull.rows() != push.cols()) {
    throw ContractViolation("compose_effective: stage shapes do not chain as "
                            "(n_s x n_h)(n_h x n_h)(n_h x n_s)");
  }
  return MixingMatrix(multiply(pull.dense(), multiply(gossip.dense(), push.dense())));
}

std::uint64_t total_edges(const TopologyConfig& config) {
  config.validate();
  const std::uint64_t n = config.n_s;
  switch (config.kind) {
    case TopologyKind::Hsl:
      return config.n_h * config.b_hs + config.n_h * config.b_hh + n * config.b_sh;
    case TopologyKind::ElLocal:
    case TopologyKind::ElOracle: return n * config.k;
    case TopologyKind::Torus: return 4 * n;
    case TopologyKind::ErdosRenyi:
      return static_cast<std::uint64_t>(std::llround(config.p * static_cast<double>(n * (n - 1))));
    case TopologyKind::FedAvgStar: return 2 * n;
  }
  return 0;
}

HslRound sample_hsl_round(const TopologyConfig& config, std::uint64_t master_seed,
                          std::uint64_t round) {
  if (config.kind != TopologyKind::Hsl) {
    throw ContractViolation("sample_hsl_round: config is not hsl");
  }
  config.validate();
  auto push_rng = Rng::child(master_seed, round, StreamTag::Push, 0);
  auto gossip_rng = Rng::child(master_seed, round, StreamTag::Gossip, 0);
  auto pull_rng = Rng::child(master_seed, round, StreamTag::Pull, 0);
  return HslRound{sample_push_matrix(config.n_s, config.n_h, config.b_hs, push_rng),
                  sample_gossip_matrix(config.n_h, config.b_hh, gossip_rng),
                  sample_pull_matrix(config.n_s, config.n_h, config.b_sh, pull_rng)};
}

MixingMatrix sample_effective(const TopologyConfig& config, std::uint64_t master_seed,
                              std::uint64_t round) {
  if (config.kind == TopologyKind::Hsl) {
    auto stages = sample_hsl_round(config, master_seed, round);
    return compose_effective(stages.pull, stages.gossip, stages.push);
  }
  auto rng = Rng::child(master_seed, round, StreamTag::Baseline, 0);
  return sample_baseline(config, rng);
}

}  // namespace hsl
