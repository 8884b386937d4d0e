#include "hsl/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hsl/error.hpp"

namespace hsl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double as_double(std::size_t v) { return static_cast<double>(v); }

}  // namespace

double beta_sampling(std::size_t n, std::size_t b) {
  if (n < 2) throw ConfigError("sampling factor needs a population of at least 2");
  if (b < 1 || b > n) throw ConfigError("sampling budget must be in [1, population]");
  // (1/b)(1 - (b-1)/(n-1)) rewritten so that b == n gives exactly zero.
  return as_double(n - b) / (as_double(b) * as_double(n - 1));
}

double beta_gossip(std::size_t n, std::size_t b) {
  if (n < 2) throw ConfigError("gossip factor needs n_h >= 2");
  if (b < 1 || b > n - 1) throw ConfigError("gossip budget must be in [1, n_h - 1]");
  const double q = as_double(b) / as_double(n - 1);
  // 1 - (1 - q)^n; at q == 1 log1p(-1) = -inf and the expression is exactly 1.
  const double reach = -std::expm1(as_double(n) * std::log1p(-q));
  return reach / as_double(b) - 1.0 / as_double(n - 1);
}

BetaBounds beta_bounds(std::size_t n_s, std::size_t n_h, std::size_t b_hs, std::size_t b_hh,
                       std::size_t b_sh) {
  if (n_s < 2) throw ConfigError("n_s must be >= 2");
  if (n_h < 2) throw ConfigError("n_h must be >= 2");
  if (b_hs < 1 || b_hs > n_s) throw ConfigError("b_hs must satisfy 1 <= b_hs <= n_s");
  if (b_hh < 1 || b_hh > n_h - 1) throw ConfigError("b_hh must satisfy 1 <= b_hh <= n_h - 1");
  if (b_sh < 1 || b_sh > n_h) throw ConfigError("b_sh must satisfy 1 <= b_sh <= n_h");

  BetaBounds b;
  b.beta_hs = beta_sampling(n_s, b_hs);
  b.beta_hh = beta_gossip(n_h, b_hh);
  b.beta_sh = beta_sampling(n_h, b_sh);
  b.beta_hsl = b.beta_hs * b.beta_hh * b.beta_sh;
  b.beta_prime =
      0.5 * (b.beta_hsl + as_double(n_s) / as_double(n_h) * b.beta_hs * (1.0 + b.beta_hh));
  return b;
}

double derived_step_size(const ProblemConstants& c, const BetaBounds& b) {
  if (!(c.L > 0.0)) throw ConfigError("step size: L must be > 0");
  if (c.T == 0) throw ConfigError("step size: T must be >= 1");
  if (c.sigma_sq < 0.0 || c.H_sq < 0.0 || c.delta0 < 0.0) {
    throw ConfigError("step size: sigma^2, H^2 and delta0 must be nonnegative");
  }
  const double T = as_double(c.T);
  const double noise_term =
      (1.0 + 663.0 * b.beta_prime) * c.sigma_sq + 663.0 * b.beta_prime * c.H_sq;

  const double denom1 = 2.0 * T * c.L * noise_term;
  const double branch1 = denom1 > 0.0 ? std::sqrt(as_double(c.n_s) * c.delta0 / denom1) : kInf;

  const double denom2 = 250.0 * T * c.L * c.L * b.beta_hsl * (c.sigma_sq + c.H_sq);
  const double branch2 = denom2 > 0.0 ? std::cbrt(c.delta0 / denom2) : kInf;

  const double branch3 = 1.0 / (20.0 * c.L);
  return std::min({branch1, branch2, branch3});
}

double consensus_bound(const BetaBounds& b, double gamma, double sigma_sq, double H_sq) {
  const double beta = b.beta_hsl;
  if (!(beta < 1.0)) {
    throw DomainError("consensus bound needs beta_hsl < 1, got " + std::to_string(beta));
  }
  if (gamma < 0.0) throw DomainError("consensus bound needs gamma >= 0");
  const double one_minus = 1.0 - beta;
  return 20.0 * (1.0 + 3.0 * beta) / (one_minus * one_minus) * beta * gamma * gamma *
         (sigma_sq + H_sq);
}

BetaHslCoverage check_beta_hsl_coverage(std::size_t n_s, std::size_t n_h, std::size_t b_hs,
                                    std::size_t b_sh, double beta_hsl) {
  BetaHslCoverage r;
  r.premise_holds = n_h * b_hs >= n_s * b_sh;
  r.bound = as_double(n_h) / as_double(n_s) * kOneMinusInvE;
  r.satisfied = !r.premise_holds || beta_hsl <= r.bound + 1e-12;
  return r;
}

}  // namespace hsl
