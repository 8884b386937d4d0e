#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hsl/matrix.hpp"
#include "hsl/topology.hpp"

namespace hsl {

enum class Stage { Push, Gossip, Pull, FullHsl };

std::string_view to_string(Stage stage) noexcept;

/// Outcome of one Monte Carlo claim.
///
/// Bound claims pass when empirical <= bound_or_target + 3 SE, equality claims
/// when |empirical - bound_or_target| <= 3 SE. Both add a floating-point floor
/// of kNumericFloor * (1 + |bound_or_target|) so exact identities survive rounding.
struct VerificationReport {
  enum class Kind { Bound, Equality };

  std::string claim;
  Kind kind = Kind::Bound;
  std::size_t trials = 0;
  double empirical = 0.0;
  double bound_or_target = 0.0;
  double standard_error = 0.0;
  bool passed = false;

  static constexpr double kSigmas = 3.0;
  static constexpr double kNumericFloor = 1e-12;

  /// Sets `passed` from the other fields.
  void decide();
};

/// Expected CD contraction of one stage, with X held fixed.
struct StageCdrResult {
  /// E[CD_after] / CD(X) against the stage beta (one-sided).
  VerificationReport cdr;
  /// E[(1/m) sum_k ||y_k - mean(X)||^2] / CD(X) against the stage beta
  /// (two-sided). Absent for FULL_HSL.
  std::optional<VerificationReport> distance_to_old_mean;
};

/// Input X has n_s rows for PUSH / FULL_HSL and n_h rows for GOSSIP / PULL.
/// Throws ContractViolation on a shape mismatch and DomainError when CD(X) == 0.
StageCdrResult verify_stage_cdr(Stage stage, const TopologyConfig& config, const ModelMatrix& x,
                                std::size_t trials, std::uint64_t seed);

/// Coordinatewise check that E[mean after stage] == mean before. The report
/// shows the coordinate with the largest |deviation| / SE and passes only if
/// every coordinate passes.
VerificationReport verify_average_preservation(Stage stage, const TopologyConfig& config,
                                               const ModelMatrix& x, std::size_t trials,
                                               std::uint64_t seed);

/// E||mean after - mean before||^2 against beta / m_out * CD(X) (PUSH, PULL:
/// two-sided equality; GOSSIP: one-sided bound).
VerificationReport verify_mean_shift(Stage stage, const TopologyConfig& config,
                                     const ModelMatrix& x, std::size_t trials, std::uint64_t seed);

/// Chi-square goodness of fit of node 0's gossip in-degree against
/// Binomial(n - 1, b / (n - 1)) at significance 0.01. Bins with expected
/// count < 5 are pooled into their neighbours.
VerificationReport verify_indegree_binomial(std::size_t n, std::size_t b, std::size_t trials,
                                            std::uint64_t seed);

/// Mean gossip in-degree of node 0 against b (two-sided).
VerificationReport verify_indegree_mean(std::size_t n, std::size_t b, std::size_t trials,
                                        std::uint64_t seed);

enum class InputFamily { Gaussian, OneHot, RankOne };

std::string_view to_string(InputFamily family) noexcept;

/// Test inputs: Gaussian rows, rows that are random standard basis vectors,
/// or rows s_i * v for a fixed random v.
ModelMatrix make_input(InputFamily family, std::size_t rows, std::size_t dim, std::uint64_t seed);

/// HSL configurations covered by the verification grid.
std::vector<TopologyConfig> verification_grid();

/// Every claim over the grid and all input families, plus the in-degree checks.
std::vector<VerificationReport> run_verification_grid(std::uint64_t seed, std::size_t trials,
                                                      std::size_t dim = 4);

}  // namespace hsl
