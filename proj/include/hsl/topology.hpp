#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "hsl/matrix.hpp"
#include "hsl/rng.hpp"

namespace hsl {

enum class TopologyKind { Hsl, ElLocal, ElOracle, ErdosRenyi, Torus, FedAvgStar };

std::string_view to_string(TopologyKind kind) noexcept;
/// Accepts the lowercase names used in config files ("hsl", "el_local", ...).
TopologyKind parse_topology_kind(std::string_view name);

/// Communication graph family of one experiment.
///
/// HSL uses (n_s, n_h, b_hs, b_hh, b_sh). Flat baselines use n_s plus k
/// (EL Local / EL Oracle) or p (Erdos-Renyi). Unused fields are ignored.
struct TopologyConfig {
  TopologyKind kind = TopologyKind::Hsl;
  std::size_t n_s = 0;
  std::size_t n_h = 0;
  std::size_t b_hs = 0;
  std::size_t b_hh = 0;
  std::size_t b_sh = 0;
  std::size_t k = 0;
  double p = 0.0;

  static TopologyConfig hsl(std::size_t n_s, std::size_t n_h, std::size_t b_hs, std::size_t b_hh,
                            std::size_t b_sh);
  static TopologyConfig el_local(std::size_t n, std::size_t k);
  static TopologyConfig el_oracle(std::size_t n, std::size_t k);
  static TopologyConfig erdos_renyi(std::size_t n, double p);
  static TopologyConfig torus(std::size_t n);
  static TopologyConfig fedavg_star(std::size_t n);

  /// Throws ConfigError naming the violated constraint.
  void validate() const;
  bool is_baseline() const noexcept { return kind != TopologyKind::Hsl; }
  /// Human-readable tuple, e.g. "hsl(100,5,2,2,2)" or "el_local(100,10)".
  std::string label() const;

  bool operator==(const TopologyConfig&) const = default;
};

/// Spoke-to-hub push W_hs (n_h x n_s): each hub averages b_hs distinct spokes.
MixingMatrix sample_push_matrix(std::size_t n_s, std::size_t n_h, std::size_t b_hs, Rng& rng);

/// Gossip on n nodes (n x n): every node sends to b distinct other nodes; a
/// receiver averages itself with everything it received. Also EL Local's matrix.
MixingMatrix sample_gossip_matrix(std::size_t n, std::size_t b, Rng& rng);

/// Hub-to-spoke pull W_sh (n_s x n_h): each spoke averages b_sh distinct hubs.
MixingMatrix sample_pull_matrix(std::size_t n_s, std::size_t n_h, std::size_t b_sh, Rng& rng);

/// One round's matrix for a flat baseline topology (n_s x n_s).
MixingMatrix sample_baseline(const TopologyConfig& config, Rng& rng);

/// W_sh * W_hh * W_hs.
MixingMatrix compose_effective(const MixingMatrix& pull, const MixingMatrix& gossip,
                               const MixingMatrix& push);

/// Directed edges per round. Erdos-Renyi reports the rounded expectation.
std::uint64_t total_edges(const TopologyConfig& config);

/// The three stage matrices of one HSL round.
struct HslRound {
  MixingMatrix push;
  MixingMatrix gossip;
  MixingMatrix pull;
};

/// Samples round `round` of an HSL config from the per-stage child streams of `master_seed`.
HslRound sample_hsl_round(const TopologyConfig& config, std::uint64_t master_seed,
                          std::uint64_t round);

/// Effective n_s x n_s matrix of round `round` for any topology kind.
MixingMatrix sample_effective(const TopologyConfig& config, std::uint64_t master_seed,
                              std::uint64_t round);

}  // namespace hsl
