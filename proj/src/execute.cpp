#include "hsl/execute.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>
#include <system_error>

#include "hsl/bounds.hpp"
#include "hsl/error.hpp"
#include "hsl/learning.hpp"
#include "hsl/rng.hpp"

#ifndef HSL_VERSION_STRING
#define HSL_VERSION_STRING "0.0.0"
#endif

namespace hsl {
namespace {

constexpr const char* kManifestName = "manifest.txt";

// RFC 4180 quoting for free-text fields.
std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string optional_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::string topology_fields(const TopologyConfig& c) {
  std::ostringstream out;
  out << to_string(c.kind) << ',' << c.n_s << ',';
  if (c.kind == TopologyKind::Hsl) {
    out << c.n_h << ',' << c.b_hs << ',' << c.b_hh << ',' << c.b_sh << ",,";
  } else {
    out << ",,,,";
    if (c.kind == TopologyKind::ElLocal || c.kind == TopologyKind::ElOracle) out << c.k;
    out << ',';
    if (c.kind == TopologyKind::ErdosRenyi) out << format_double(c.p);
  }
  return out.str();
}

std::string final_models_csv(const Evaluation& e) {
  std::ostringstream out;
  out << kFinalModelsHeader << '\n';
  auto row = [&](const char* name, const std::vector<double>& values) {
    const auto q = quantiles(values);
    out << name << ',' << format_double(q.min) << ',' << format_double(q.p25) << ','
        << format_double(q.p50) << ',' << format_double(q.p75) << ',' << format_double(q.max)
        << '\n';
  };
  row("loss", e.node_loss);
  if (!e.node_accuracy.empty()) row("accuracy", e.node_accuracy);
  return out.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::unique_ptr<Objective> build_objective(const ExperimentSpec& spec) {
  if (spec.objective.kind == ObjectiveKind::Quadratic) {
    return std::make_unique<QuadraticObjective>(
        make_quadratic_objective(spec.objective.quadratic, spec.seed));
  }
  return std::make_unique<LogisticObjective>(
      make_logistic_objective(spec.objective.logistic, spec.seed));
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string metrics_csv(const std::vector<RoundMetrics>& metrics) {
  std::ostringstream out;
  out << kMetricsHeader << '\n';
  for (const auto& m : metrics) {
    out << m.round << ',' << format_double(m.cd_pre) << ',' << format_double(m.cd_post) << ','
        << optional_field(m.cdr) << ',' << optional_field(m.mean_loss) << ','
        << optional_field(m.mean_grad_norm_sq) << ',' << optional_field(m.accuracy) << '\n';
  }
  return out.str();
}

std::string spectral_csv(const std::vector<SpectralReport>& reports) {
  std::ostringstream out;
  out << kSpectralHeader << '\n';
  for (const auto& r : reports) {
    out << topology_fields(r.config) << ',' << r.edges << ',' << r.samples << ','
        << format_double(r.mean_gap) << ',' << format_double(r.std_gap) << '\n';
  }
  return out.str();
}

std::string reports_csv(const std::vector<VerificationReport>& reports) {
  std::ostringstream out;
  out << kReportsHeader << '\n';
  for (const auto& r : reports) {
    out << csv_text(r.claim) << ',' << r.trials << ',' << format_double(r.empirical) << ','
        << format_double(r.bound_or_target) << ',' << format_double(r.standard_error) << ','
        << (r.passed ? "true" : "false") << '\n';
  }
  return out.str();
}

std::string bounds_csv(const std::vector<TopologyConfig>& configs) {
  std::ostringstream out;
  out << kBoundsHeader << '\n';
  for (const auto& c : configs) {
    out << topology_fields(c) << ',' << total_edges(c);
    if (c.kind == TopologyKind::Hsl) {
      const auto b = beta_bounds(c.n_s, c.n_h, c.b_hs, c.b_hh, c.b_sh);
      const auto coverage = check_beta_hsl_coverage(c.n_s, c.n_h, c.b_hs, c.b_sh, b.beta_hsl);
      out << ',' << format_double(b.beta_hs) << ',' << format_double(b.beta_hh) << ','
          << format_double(b.beta_sh) << ',' << format_double(b.beta_hsl) << ','
          << format_double(b.beta_prime) << ',' << (b.beta_hh <= kOneMinusInvE ? "true" : "false")
          << ',' << (coverage.premise_holds ? "true" : "false") << ','
          << format_double(coverage.bound) << ',' << (coverage.satisfied ? "true" : "false");
    } else {
      out << ",,,,,,,,,";
    }
    out << '\n';
  }
  return out.str();
}

std::string RunManifest::to_text() const {
  std::ostringstream out;
  out << "version = " << version << '\n'
      << "timestamp = " << timestamp << '\n'
      << "failed = " << (failed ? "true" : "false") << '\n'
      << "failure = " << failure << '\n';
  for (const auto& f : files) out << "file = " << f.file << ' ' << f.sha256 << '\n';
  std::istringstream spec(spec_snapshot);
  for (std::string line; std::getline(spec, line);) out << "spec = " << line << '\n';
  return out.str();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

RunManifest execute(const ExperimentSpec& spec) {
  spec.validate();
  const auto& dir = spec.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  // A stale manifest would claim completion for files about to be replaced.
  std::filesystem::remove(dir / kManifestName, ec);
  if (ec) throw IoError("cannot remove old manifest in '" + dir.string() + "': " + ec.message());

  RunManifest manifest;
  manifest.spec_snapshot = serialize_config(spec);
  manifest.version = HSL_VERSION_STRING;

  std::vector<std::pair<std::string, std::string>> outputs;
  switch (spec.command) {
    case Command::Run: {
      const auto objective = build_objective(spec);
      try {
        const auto result = run_experiment(spec.training, *objective);
        outputs.emplace_back("metrics.csv", metrics_csv(result.metrics));
        outputs.emplace_back("final_models.csv",
                             final_models_csv(evaluate(result.final_models, *objective)));
      } catch (const DivergenceError& e) {
        manifest.failed = true;
        manifest.failure = "divergence at round " + std::to_string(e.round());
      }
      break;
    }
    case Command::Spectral: {
      std::vector<SpectralReport> reports;
      for (std::size_t i = 0; i < spec.topologies.size(); ++i) {
        reports.push_back(average_spectral_gap(
            spec.topologies[i], spec.spectral_samples,
            derive_seed(spec.seed, i, StreamTag::Spectral, 0)));
      }
      outputs.emplace_back("spectral.csv", spectral_csv(reports));
      break;
    }
    case Command::Bounds:
      outputs.emplace_back("bounds.csv", bounds_csv(spec.topologies));
      break;
    case Command::Verify: {
      const auto reports = run_verification_grid(spec.seed, spec.verify_trials, spec.verify_dim);
      std::size_t failures = 0;
      for (const auto& r : reports) failures += r.passed ? 0 : 1;
      if (failures > 0) {
        manifest.failed = true;
        manifest.failure = std::to_string(failures) + " of " + std::to_string(reports.size()) +
                           " claims failed";
      }
      outputs.emplace_back("reports.csv", reports_csv(reports));
      break;
    }
  }

  for (const auto& [name, bytes] : outputs) {
    write_file(dir / name, bytes);
    manifest.files.push_back({name, sha256_hex(bytes)});
  }

  manifest.timestamp = utc_timestamp();
  manifest.path = dir / kManifestName;
  const auto staging = dir / (std::string(kManifestName) + ".tmp");
  write_file(staging, manifest.to_text());
  std::filesystem::rename(staging, manifest.path, ec);
  if (ec) throw IoError("cannot finalize manifest in '" + dir.string() + "': " + ec.message());
  return manifest;
}

}  // namespace hsl
