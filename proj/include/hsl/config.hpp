#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hsl/learning.hpp"
#include "hsl/objective.hpp"
#include "hsl/topology.hpp"

namespace hsl {

enum class Command { Run, Spectral, Bounds, Verify };

std::string_view to_string(Command command) noexcept;
Command parse_command(std::string_view name);

struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::Quadratic;
  QuadraticSpec quadratic;
  LogisticSpec logistic;

  bool operator==(const ObjectiveConfig&) const;
};

/// A fully validated experiment description.
struct ExperimentSpec {
  std::string name;
  Command command = Command::Run;
  std::uint64_t seed = 0;
  std::vector<TopologyConfig> topologies;  ///< exactly one for RUN
  TrainConfig training;                    ///< RUN only; training.topology mirrors topologies[0]
  ObjectiveConfig objective;               ///< RUN only
  std::size_t spectral_samples = 1000;     ///< SPECTRAL only
  std::size_t verify_trials = 10000;       ///< VERIFY only
  std::size_t verify_dim = 4;              ///< VERIFY only
  std::filesystem::path output_dir;

  /// Re-checks every invariant; parse_config calls this.
  void validate() const;
  bool operator==(const ExperimentSpec&) const;
};

/// Parses the sectioned key = value format documented in docs/config-format.md.
/// Throws ConfigError naming the offending line, key or constraint.
ExperimentSpec parse_config(std::string_view text);

ExperimentSpec load_config_file(const std::filesystem::path& path);

/// Canonical text form; parse_config(serialize_config(s)) == s.
std::string serialize_config(const ExperimentSpec& spec);

}  // namespace hsl
