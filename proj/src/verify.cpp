#include "hsl/verify.hpp"

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "hsl/bounds.hpp"
#include "hsl/error.hpp"
#include "hsl/metrics.hpp"
#include "hsl/parallel.hpp"
#include "hsl/rng.hpp"

namespace hsl {
namespace {

struct MeanAndError {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Fixed-order reduction; the shift keeps constant samples at exactly zero spread.
MeanAndError summarize(const std::vector<double>& samples) {
  const double count = static_cast<double>(samples.size());
  const double shift = samples.front();
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : samples) {
    sum += v - shift;
    sum_sq += (v - shift) * (v - shift);
  }
  const double variance =
      samples.size() > 1 ? std::max(0.0, (sum_sq - sum * sum / count) / (count - 1.0)) : 0.0;
  return {shift + sum / count, std::sqrt(variance / count)};
}

std::size_t input_rows(Stage stage, const TopologyConfig& c) {
  return (stage == Stage::Push || stage == Stage::FullHsl) ? c.n_s : c.n_h;
}

std::size_t output_rows(Stage stage, const TopologyConfig& c) {
  return (stage == Stage::Push || stage == Stage::Gossip) ? c.n_h : c.n_s;
}

double stage_beta(Stage stage, const TopologyConfig& c) {
  const auto b = beta_bounds(c.n_s, c.n_h, c.b_hs, c.b_hh, c.b_sh);
  switch (stage) {
    case Stage::Push: return b.beta_hs;
    case Stage::Gossip: return b.beta_hh;
    case Stage::Pull: return b.beta_sh;
    case Stage::FullHsl: return b.beta_hsl;
  }
  return 0.0;
}

void check_input(Stage stage, const TopologyConfig& c, const ModelMatrix& x) {
  if (c.kind != TopologyKind::Hsl) throw ContractViolation("verify: topology must be hsl");
  c.validate();
  if (x.rows() != input_rows(stage, c) || x.cols() == 0) {
    throw ContractViolation("verify: " + std::string(to_string(stage)) + " input needs " +
                            std::to_string(input_rows(stage, c)) + " rows, got " +
                            std::to_string(x.rows()));
  }
}

// One independent application of `stage` to x; trial t uses round t of `seed`.
ModelMatrix apply_stage(Stage stage, const TopologyConfig& c, const ModelMatrix& x,
                        std::uint64_t seed, std::uint64_t trial) {
  switch (stage) {
    case Stage::Push: {
      auto rng = Rng::child(seed, trial, StreamTag::Push, 0);
      return sample_push_matrix(c.n_s, c.n_h, c.b_hs, rng).apply(x);
    }
    case Stage::Gossip: {
      auto rng = Rng::child(seed, trial, StreamTag::Gossip, 0);
      return sample_gossip_matrix(c.n_h, c.b_hh, rng).apply(x);
    }
    case Stage::Pull: {
      auto rng = Rng::child(seed, trial, StreamTag::Pull, 0);
      return sample_pull_matrix(c.n_s, c.n_h, c.b_sh, rng).apply(x);
    }
    case Stage::FullHsl: {
      const auto r = sample_hsl_round(c, seed, trial);
      return r.pull.apply(r.gossip.apply(r.push.apply(x)));
    }
  }
  throw ContractViolation("verify: unknown stage");
}

double squared_distance_to(const ModelMatrix& y, std::size_t row, const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t j = 0; j < y.cols(); ++j) s += (y(row, j) - p[j]) * (y(row, j) - p[j]);
  return s;
}

std::string claim_name(const char* what, Stage stage, const TopologyConfig& c) {
  return std::string(what) + "/" + std::string(to_string(stage)) + "/" + c.label();
}

void require_trials(std::size_t trials) {
  if (trials < 2) throw ConfigError("verify: trials must be >= 2");
}

}  // namespace

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::Push: return "push";
    case Stage::Gossip: return "gossip";
    case Stage::Pull: return "pull";
    case Stage::FullHsl: return "full_hsl";
  }
  return "unknown";
}

std::string_view to_string(InputFamily family) noexcept {
  switch (family) {
    case InputFamily::Gaussian: return "gaussian";
    case InputFamily::OneHot: return "one_hot";
    case InputFamily::RankOne: return "rank_one";
  }
  return "unknown";
}

void VerificationReport::decide() {
  const double slack = kSigmas * standard_error + kNumericFloor * (1.0 + std::abs(bound_or_target));
  if (!std::isfinite(empirical)) {
    passed = false;
  } else if (kind == Kind::Bound) {
    passed = empirical <= bound_or_target + slack;
  } else {
    passed = std::abs(empirical - bound_or_target) <= slack;
  }
}

StageCdrResult verify_stage_cdr(Stage stage, const TopologyConfig& config, const ModelMatrix& x,
                                std::size_t trials, std::uint64_t seed) {
  check_input(stage, config, x);
  require_trials(trials);
  const double cd_before = consensus_distance(x);
  if (!(cd_before > 0.0)) {
    throw DomainError("verify: CD of the input is zero, the contraction ratio is undefined");
  }
  const auto old_mean = row_mean(x);
  const double beta = stage_beta(stage, config);

  std::vector<double> cd_after(trials);
  std::vector<double> to_old_mean(trials);
  parallel_for(trials, [&](std::size_t t) {
    const auto y = apply_stage(stage, config, x, seed, t);
    cd_after[t] = consensus_distance(y);
    double s = 0.0;
    for (std::size_t k = 0; k < y.rows(); ++k) s += squared_distance_to(y, k, old_mean);
    to_old_mean[t] = s / static_cast<double>(y.rows());
  });

  StageCdrResult result;
  const auto cd = summarize(cd_after);
  result.cdr = {claim_name("cdr", stage, config),
                VerificationReport::Kind::Bound,
                trials,
                cd.mean / cd_before,
                beta,
                cd.standard_error / cd_before,
                false};
  result.cdr.decide();

  if (stage != Stage::FullHsl) {
    const auto dist = summarize(to_old_mean);
    VerificationReport r{claim_name("distance_to_old_mean", stage, config),
                         VerificationReport::Kind::Equality,
                         trials,
                         dist.mean / cd_before,
                         beta,
                         dist.standard_error / cd_before,
                         false};
    r.decide();
    result.distance_to_old_mean = r;
  }
  return result;
}

VerificationReport verify_average_preservation(Stage stage, const TopologyConfig& config,
                                               const ModelMatrix& x, std::size_t trials,
                                               std::uint64_t seed) {
  check_input(stage, config, x);
  require_trials(trials);
  const auto before = row_mean(x);
  const std::size_t d = x.cols();

  std::vector<std::vector<double>> after(d, std::vector<double>(trials));
  parallel_for(trials, [&](std::size_t t) {
    const auto mean = row_mean(apply_stage(stage, config, x, seed, t));
    for (std::size_t j = 0; j < d; ++j) after[j][t] = mean[j];
  });

  // Report the coordinate with the largest standardized deviation.
  VerificationReport worst;
  double worst_score = -1.0;
  bool all_passed = true;
  for (std::size_t j = 0; j < d; ++j) {
    const auto s = summarize(after[j]);
    VerificationReport r{claim_name("average_preservation", stage, config),
                         VerificationReport::Kind::Equality,
                         trials,
                         s.mean,
                         before[j],
                         s.standard_error,
                         false};
    r.decide();
    all_passed = all_passed && r.passed;
    const double deviation = std::abs(s.mean - before[j]);
    const double score = s.standard_error > 0.0
                             ? deviation / s.standard_error
                             : (r.passed ? 0.0 : std::numeric_limits<double>::infinity());
    if (score > worst_score) {
      worst_score = score;
      worst = r;
    }
  }
  worst.passed = all_passed;
  return worst;
}

VerificationReport verify_mean_shift(Stage stage, const TopologyConfig& config,
                                     const ModelMatrix& x, std::size_t trials, std::uint64_t seed) {
  if (stage == Stage::FullHsl) {
    throw ContractViolation("verify_mean_shift: stage must be push, gossip or pull");
  }
  check_input(stage, config, x);
  require_trials(trials);
  const auto before = row_mean(x);
  const double cd_before = consensus_distance(x);
  const double beta = stage_beta(stage, config);
  const double target = beta * cd_before / static_cast<double>(output_rows(stage, config));

  std::vector<double> shift(trials);
  parallel_for(trials, [&](std::size_t t) {
    const auto mean = row_mean(apply_stage(stage, config, x, seed, t));
    double s = 0.0;
    for (std::size_t j = 0; j < mean.size(); ++j) s += (mean[j] - before[j]) * (mean[j] - before[j]);
    shift[t] = s;
  });
  const auto s = summarize(shift);
  VerificationReport r{claim_name("mean_shift", stage, config),
                       stage == Stage::Gossip ? VerificationReport::Kind::Bound
                                              : VerificationReport::Kind::Equality,
                       trials,
                       s.mean,
                       target,
                       s.standard_error,
                       false};
  r.decide();
  return r;
}

namespace {

std::vector<double> indegree_samples(std::size_t n, std::size_t b, std::size_t trials,
                                     std::uint64_t seed) {
  std::vector<double> indegree(trials);
  parallel_for(trials, [&](std::size_t t) {
    auto rng = Rng::child(seed, t, StreamTag::Gossip, 0);
    indegree[t] = static_cast<double>(sample_gossip_matrix(n, b, rng).nonzeros_in_row(0) - 1);
  });
  return indegree;
}

}  // namespace

VerificationReport verify_indegree_binomial(std::size_t n, std::size_t b, std::size_t trials,
                                            std::uint64_t seed) {
  if (n < 2 || b < 1 || b > n - 1) throw ConfigError("indegree: need 1 <= b <= n - 1");
  require_trials(trials);
  const auto samples = indegree_samples(n, b, trials, seed);

  const std::size_t support = n;  // in-degree ranges over 0 .. n - 1
  std::vector<double> observed(support, 0.0);
  for (double v : samples) observed[static_cast<std::size_t>(v)] += 1.0;

  const boost::math::binomial_distribution<double> model(
      static_cast<double>(n - 1), static_cast<double>(b) / static_cast<double>(n - 1));
  std::vector<double> expected(support);
  for (std::size_t k = 0; k < support; ++k) {
    expected[k] = static_cast<double>(trials) * boost::math::pdf(model, static_cast<double>(k));
  }

  VerificationReport r;
  r.claim = "indegree_binomial/gossip(" + std::to_string(n) + "," + std::to_string(b) + ")";
  r.kind = VerificationReport::Kind::Bound;
  r.trials = trials;

  // Pool adjacent bins until each expects at least 5 observations.
  std::vector<double> pooled_obs;
  std::vector<double> pooled_exp;
  double acc_obs = 0.0;
  double acc_exp = 0.0;
  bool impossible_outcome = false;
  for (std::size_t k = 0; k < support; ++k) {
    if (expected[k] == 0.0 && observed[k] > 0.0) impossible_outcome = true;
    acc_obs += observed[k];
    acc_exp += expected[k];
    if (acc_exp >= 5.0) {
      pooled_obs.push_back(acc_obs);
      pooled_exp.push_back(acc_exp);
      acc_obs = acc_exp = 0.0;
    }
  }
  if (!pooled_exp.empty()) {
    pooled_obs.back() += acc_obs;
    pooled_exp.back() += acc_exp;
  }

  if (impossible_outcome) {
    r.empirical = std::numeric_limits<double>::infinity();
    r.bound_or_target = 0.0;
  } else if (pooled_exp.size() < 2) {
    r.empirical = 0.0;  // degenerate distribution: a single possible outcome
    r.bound_or_target = 0.0;
  } else {
    double stat = 0.0;
    for (std::size_t i = 0; i < pooled_exp.size(); ++i) {
      const double diff = pooled_obs[i] - pooled_exp[i];
      stat += diff * diff / pooled_exp[i];
    }
    const boost::math::chi_squared_distribution<double> chi(
        static_cast<double>(pooled_exp.size() - 1));
    r.empirical = stat;
    r.bound_or_target = boost::math::quantile(boost::math::complement(chi, 0.01));
  }
  r.standard_error = 0.0;
  r.decide();
  return r;
}

VerificationReport verify_indegree_mean(std::size_t n, std::size_t b, std::size_t trials,
                                        std::uint64_t seed) {
  if (n < 2 || b < 1 || b > n - 1) throw ConfigError("indegree: need 1 <= b <= n - 1");
  require_trials(trials);
  const auto s = summarize(indegree_samples(n, b, trials, seed));
  VerificationReport r{"indegree_mean/gossip(" + std::to_string(n) + "," + std::to_string(b) + ")",
                       VerificationReport::Kind::Equality,
                       trials,
                       s.mean,
                       static_cast<double>(b),
                       s.standard_error,
                       false};
  r.decide();
  return r;
}

ModelMatrix make_input(InputFamily family, std::size_t rows, std::size_t dim, std::uint64_t seed) {
  if (rows == 0 || dim == 0) throw ContractViolation("make_input: empty shape");
  auto rng = Rng::child(seed, 0, StreamTag::Verify, static_cast<std::uint64_t>(family));
  ModelMatrix x(rows, dim);
  switch (family) {
    case InputFamily::Gaussian:
      for (double& v : x.values()) v = rng.normal();
      break;
    case InputFamily::OneHot: {
      // Consecutive rows use consecutive coordinates, so any two adjacent rows differ.
      const std::size_t offset = rng.uniform_index(dim);
      for (std::size_t i = 0; i < rows; ++i) x(i, (offset + i) % dim) = 1.0;
      break;
    }
    case InputFamily::RankOne: {
      std::vector<double> direction(dim);
      for (double& v : direction) v = rng.normal();
      for (std::size_t i = 0; i < rows; ++i) {
        const double scale = rng.normal();
        for (std::size_t j = 0; j < dim; ++j) x(i, j) = scale * direction[j];
      }
      break;
    }
  }
  return x;
}

std::vector<TopologyConfig> verification_grid() {
  using T = TopologyConfig;
  return {
      T::hsl(100, 5, 2, 2, 2),   T::hsl(9, 4, 3, 1, 1),   T::hsl(20, 6, 4, 2, 2),
      T::hsl(30, 6, 5, 3, 2),    T::hsl(10, 4, 10, 3, 4), T::hsl(12, 2, 3, 1, 1),
      T::hsl(50, 10, 5, 3, 3),   T::hsl(100, 10, 15, 5, 2), T::hsl(40, 8, 1, 1, 1),
      T::hsl(60, 5, 20, 4, 1),   T::hsl(25, 5, 5, 1, 5),  T::hsl(16, 3, 16, 1, 2),
      T::hsl(2, 2, 1, 1, 1),
  };
}

std::vector<VerificationReport> run_verification_grid(std::uint64_t seed, std::size_t trials,
                                                      std::size_t dim) {
  std::vector<VerificationReport> reports;
  const auto grid = verification_grid();
  const InputFamily families[] = {InputFamily::Gaussian, InputFamily::OneHot,
                                  InputFamily::RankOne};
  std::uint64_t cell = 0;
  auto tag = [](VerificationReport r, InputFamily f) {
    r.claim += "/" + std::string(to_string(f));
    return r;
  };

  for (const auto& config : grid) {
    for (auto family : families) {
      for (auto stage : {Stage::Push, Stage::Gossip, Stage::Pull, Stage::FullHsl}) {
        const std::uint64_t cell_seed = derive_seed(seed, cell++, StreamTag::Verify, 0);
        const auto x = make_input(family, input_rows(stage, config), dim, cell_seed);
        const auto result = verify_stage_cdr(stage, config, x, trials, cell_seed);
        reports.push_back(tag(result.cdr, family));
        if (result.distance_to_old_mean) reports.push_back(tag(*result.distance_to_old_mean, family));
      }
    }
  }

  // Average preservation and mean-shift claims on the reference configuration.
  const auto reference = TopologyConfig::hsl(100, 5, 2, 2, 2);
  {
    const std::uint64_t cell_seed = derive_seed(seed, cell++, StreamTag::Verify, 0);
    const auto x = make_input(InputFamily::Gaussian, reference.n_s, dim, cell_seed);
    reports.push_back(tag(
        verify_average_preservation(Stage::FullHsl, reference, x, trials, cell_seed),
        InputFamily::Gaussian));
  }
  for (auto stage : {Stage::Push, Stage::Gossip, Stage::Pull}) {
    const std::uint64_t cell_seed = derive_seed(seed, cell++, StreamTag::Verify, 0);
    const auto x = make_input(InputFamily::Gaussian, input_rows(stage, reference), dim, cell_seed);
    reports.push_back(
        tag(verify_mean_shift(stage, reference, x, trials, cell_seed), InputFamily::Gaussian));
  }

  const std::size_t indegree_trials = std::max<std::size_t>(trials, 50000);
  reports.push_back(
      verify_indegree_binomial(10, 2, indegree_trials, derive_seed(seed, cell++, StreamTag::Verify, 0)));
  reports.push_back(
      verify_indegree_mean(10, 2, indegree_trials, derive_seed(seed, cell++, StreamTag::Verify, 0)));
  return reports;
}

}  // namespace hsl
