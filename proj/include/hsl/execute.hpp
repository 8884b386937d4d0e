#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hsl/config.hpp"
#include "hsl/metrics.hpp"
#include "hsl/spectral.hpp"
#include "hsl/verify.hpp"

namespace hsl {

inline constexpr const char* kMetricsHeader =
    "round,cd_pre,cd_post,cdr,mean_loss,mean_grad_norm_sq,accuracy";
inline constexpr const char* kSpectralHeader =
    "kind,n_s,n_h,b_hs,b_hh,b_sh,k,p,edges,samples,mean_gap,std_gap";
inline constexpr const char* kReportsHeader =
    "claim,trials,empirical,bound_or_target,standard_error,passed";
inline constexpr const char* kBoundsHeader =
    "kind,n_s,n_h,b_hs,b_hh,b_sh,k,p,edges,beta_hs,beta_hh,beta_sh,beta_hsl,beta_prime,"
    "beta_hh_bounded,bhsl_premise,bhsl_bound,bhsl_satisfied";
inline constexpr const char* kFinalModelsHeader = "quantity,min,p25,p50,p75,max";

/// Shortest decimal text that parses back to the same double (17 significant digits).
std::string format_double(double value);

std::string metrics_csv(const std::vector<RoundMetrics>& metrics);
std::string spectral_csv(const std::vector<SpectralReport>& reports);
std::string reports_csv(const std::vector<VerificationReport>& reports);
std::string bounds_csv(const std::vector<TopologyConfig>& configs);

struct ManifestEntry {
  std::string file;    ///< relative to the output directory
  std::string sha256;  ///< lowercase hex
};

struct RunManifest {
  std::string spec_snapshot;
  std::string version;
  std::string timestamp;  ///< UTC, ISO 8601
  std::vector<ManifestEntry> files;
  bool failed = false;
  std::string failure;  ///< e.g. "divergence at round 17" or "3 claims failed"
  std::filesystem::path path;  ///< manifest.txt location

  /// key = value text; the spec snapshot is stored as escaped lines.
  std::string to_text() const;
};

std::string sha256_hex(std::string_view bytes);

/// Runs the spec's command, writes its CSV outputs into spec.output_dir, then
/// the manifest. I/O errors throw IoError and leave no manifest behind.
RunManifest execute(const ExperimentSpec& spec);

}  // namespace hsl
