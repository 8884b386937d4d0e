#pragma once

#include <cstddef>

namespace hsl {

/// Expected consensus-distance contraction factors of the three HSL stages
/// and the derived constants used by the step-size rule.
struct BetaBounds {
  double beta_hs = 0.0;
  double beta_hh = 0.0;
  double beta_sh = 0.0;
  double beta_hsl = 0.0;    ///< beta_hs * beta_hh * beta_sh
  double beta_prime = 0.0;  ///< (beta_hsl + (n_s / n_h) beta_hs (1 + beta_hh)) / 2
};

/// Smoothness, noise and heterogeneity constants of an objective, plus run length.
struct ProblemConstants {
  double L = 1.0;
  double sigma_sq = 0.0;
  double H_sq = 0.0;
  double delta0 = 0.0;  ///< F(x0) - min F
  std::size_t T = 1;
  std::size_t n_s = 1;
};

/// Averaging b of n values without replacement: (n - b) / (b (n - 1)).
double beta_sampling(std::size_t n, std::size_t b);

/// Gossip factor: (1/b)(1 - (1 - b/(n-1))^n) - 1/(n-1), evaluated with log1p/expm1.
double beta_gossip(std::size_t n, std::size_t b);

/// Throws ConfigError unless n_s, n_h >= 2 and every budget is in range.
BetaBounds beta_bounds(std::size_t n_s, std::size_t n_h, std::size_t b_hs, std::size_t b_hh,
                       std::size_t b_sh);

/// Step size
///   min{ sqrt(n_s D / (2 T L ((1 + 663 b') s2 + 663 b' H2))),
///        cbrt(D / (250 T L^2 b_hsl (s2 + H2))),
///        1 / (20 L) }
/// with zero-denominator branches taken as +inf.
double derived_step_size(const ProblemConstants& c, const BetaBounds& b);

/// Long-run pairwise consensus-distance bound
/// 20 (1 + 3b) / (1 - b)^2 * b * gamma^2 (sigma^2 + H^2), b = beta_hsl.
/// Throws DomainError when beta_hsl >= 1 or gamma < 0.
double consensus_bound(const BetaBounds& b, double gamma, double sigma_sq, double H_sq);

struct BetaHslCoverage {
  bool premise_holds = false;  ///< n_h b_hs >= n_s b_sh
  double bound = 0.0;          ///< (n_h / n_s)(1 - 1/e)
  bool satisfied = true;       ///< vacuously true when the premise fails
};

BetaHslCoverage check_beta_hsl_coverage(std::size_t n_s, std::size_t n_h, std::size_t b_hs,
                                    std::size_t b_sh, double beta_hsl);

/// 1 - 1/e, the large-n_h limit of beta_hh at b_hh = 1.
inline constexpr double kOneMinusInvE = 0.63212055882855767840;

}  // namespace hsl
