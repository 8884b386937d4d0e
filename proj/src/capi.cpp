#include "hsl/hsl.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "hsl/bounds.hpp"
#include "hsl/config.hpp"
#include "hsl/error.hpp"
#include "hsl/execute.hpp"
#include "hsl/metrics.hpp"
#include "hsl/spectral.hpp"
#include "hsl/topology.hpp"

struct hsl_matrix_t {
  hsl::Matrix value;
};

struct hsl_spec_t {
  hsl::ExperimentSpec value;
  std::string command;
};

struct hsl_manifest_t {
  hsl::RunManifest value;
  std::string path;
};

namespace {

thread_local std::string last_error;

hsl_status fail(hsl_status status, const char* message) {
  last_error = message;
  return status;
}

hsl_status status_of(hsl::ErrorCode code) {
  switch (code) {
    case hsl::ErrorCode::Config: return HSL_ERR_CONFIG;
    case hsl::ErrorCode::Contract: return HSL_ERR_CONTRACT;
    case hsl::ErrorCode::Sampling: return HSL_ERR_SAMPLING;
    case hsl::ErrorCode::Domain: return HSL_ERR_DOMAIN;
    case hsl::ErrorCode::Divergence: return HSL_ERR_DIVERGENCE;
    case hsl::ErrorCode::Io: return HSL_ERR_IO;
  }
  return HSL_ERR_UNKNOWN;
}

template <typename F>
hsl_status guarded(F&& f) {
  try {
    f();
    return HSL_OK;
  } catch (const hsl::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(HSL_ERR_UNKNOWN, "out of memory");
  } catch (const std::exception& e) {
    return fail(HSL_ERR_UNKNOWN, e.what());
  } catch (...) {
    return fail(HSL_ERR_UNKNOWN, "unknown exception");
  }
}

#define HSL_REQUIRE(cond)                                                    \
  do {                                                                       \
    if (!(cond)) return fail(HSL_ERR_INVALID_ARGUMENT, "invalid argument: " #cond); \
  } while (0)

hsl::TopologyConfig to_cpp(const hsl_topology_config& c) {
  hsl::TopologyConfig t;
  switch (c.kind) {
    case HSL_TOPOLOGY_HSL: t.kind = hsl::TopologyKind::Hsl; break;
    case HSL_TOPOLOGY_EL_LOCAL: t.kind = hsl::TopologyKind::ElLocal; break;
    case HSL_TOPOLOGY_EL_ORACLE: t.kind = hsl::TopologyKind::ElOracle; break;
    case HSL_TOPOLOGY_ERDOS_RENYI: t.kind = hsl::TopologyKind::ErdosRenyi; break;
    case HSL_TOPOLOGY_TORUS: t.kind = hsl::TopologyKind::Torus; break;
    case HSL_TOPOLOGY_FEDAVG_STAR: t.kind = hsl::TopologyKind::FedAvgStar; break;
    default: throw hsl::ConfigError("unknown topology kind " + std::to_string(c.kind));
  }
  t.n_s = c.n_s;
  t.n_h = c.n_h;
  t.b_hs = c.b_hs;
  t.b_hh = c.b_hh;
  t.b_sh = c.b_sh;
  t.k = c.k;
  t.p = c.p;
  return t;
}

hsl::BetaBounds to_cpp(const hsl_beta_bounds& b) {
  return {b.beta_hs, b.beta_hh, b.beta_sh, b.beta_hsl, b.beta_prime};
}

hsl_matrix wrap(hsl::Matrix m) { return new hsl_matrix_t{std::move(m)}; }

}  // namespace

extern "C" {

const char* hsl_version(void) { return HSL_VERSION_STRING; }

const char* hsl_status_string(hsl_status status) {
  switch (status) {
    case HSL_OK: return "ok";
    case HSL_ERR_CONFIG: return "configuration error";
    case HSL_ERR_CONTRACT: return "contract violation";
    case HSL_ERR_SAMPLING: return "sampling error";
    case HSL_ERR_DOMAIN: return "domain error";
    case HSL_ERR_DIVERGENCE: return "divergence";
    case HSL_ERR_IO: return "i/o error";
    case HSL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HSL_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case HSL_ERR_UNKNOWN: return "unknown error";
  }
  return "unrecognized status";
}

const char* hsl_last_error(void) { return last_error.c_str(); }

hsl_status hsl_matrix_shape(hsl_matrix m, size_t* rows, size_t* cols) {
  HSL_REQUIRE(m && rows && cols);
  *rows = m->value.rows();
  *cols = m->value.cols();
  return HSL_OK;
}

hsl_status hsl_matrix_data(hsl_matrix m, const double** data) {
  HSL_REQUIRE(m && data);
  *data = m->value.values().data();
  return HSL_OK;
}

void hsl_matrix_destroy(hsl_matrix m) { delete m; }

hsl_status hsl_topology_validate(const hsl_topology_config* config) {
  HSL_REQUIRE(config);
  return guarded([&] { to_cpp(*config).validate(); });
}

hsl_status hsl_total_edges(const hsl_topology_config* config, uint64_t* edges) {
  HSL_REQUIRE(config && edges);
  return guarded([&] {
    const auto c = to_cpp(*config);
    c.validate();
    *edges = hsl::total_edges(c);
  });
}

hsl_status hsl_sample_push(uint32_t n_s, uint32_t n_h, uint32_t b_hs, uint64_t seed,
                           uint64_t round, hsl_matrix* out) {
  HSL_REQUIRE(out);
  return guarded([&] {
    auto rng = hsl::Rng::child(seed, round, hsl::StreamTag::Push, 0);
    *out = wrap(hsl::sample_push_matrix(n_s, n_h, b_hs, rng).dense());
  });
}

hsl_status hsl_sample_gossip(uint32_t n, uint32_t b, uint64_t seed, uint64_t round,
                             hsl_matrix* out) {
  HSL_REQUIRE(out);
  return guarded([&] {
    auto rng = hsl::Rng::child(seed, round, hsl::StreamTag::Gossip, 0);
    *out = wrap(hsl::sample_gossip_matrix(n, b, rng).dense());
  });
}

hsl_status hsl_sample_pull(uint32_t n_s, uint32_t n_h, uint32_t b_sh, uint64_t seed,
                           uint64_t round, hsl_matrix* out) {
  HSL_REQUIRE(out);
  return guarded([&] {
    auto rng = hsl::Rng::child(seed, round, hsl::StreamTag::Pull, 0);
    *out = wrap(hsl::sample_pull_matrix(n_s, n_h, b_sh, rng).dense());
  });
}

hsl_status hsl_sample_effective(const hsl_topology_config* config, uint64_t seed, uint64_t round,
                                hsl_matrix* out) {
  HSL_REQUIRE(config && out);
  return guarded([&] {
    const auto c = to_cpp(*config);
    c.validate();
    *out = wrap(hsl::sample_effective(c, seed, round).dense());
  });
}

hsl_status hsl_consensus_distance(const double* models, size_t n, size_t d, double* out) {
  HSL_REQUIRE(models && out && n > 0 && d > 0);
  return guarded([&] {
    hsl::ModelMatrix x(n, d);
    std::memcpy(x.values().data(), models, n * d * sizeof(double));
    *out = hsl::consensus_distance(x);
  });
}

hsl_status hsl_consensus_distance_ratio(double cd_pre, double cd_post, double* ratio,
                                        int* defined) {
  HSL_REQUIRE(ratio && defined);
  return guarded([&] {
    const auto r = hsl::consensus_distance_ratio(cd_pre, cd_post);
    *defined = r ? 1 : 0;
    *ratio = r ? *r : 0.0;
  });
}

hsl_status hsl_beta_bounds_compute(uint32_t n_s, uint32_t n_h, uint32_t b_hs, uint32_t b_hh,
                                   uint32_t b_sh, hsl_beta_bounds* out) {
  HSL_REQUIRE(out);
  return guarded([&] {
    const auto b = hsl::beta_bounds(n_s, n_h, b_hs, b_hh, b_sh);
    *out = {b.beta_hs, b.beta_hh, b.beta_sh, b.beta_hsl, b.beta_prime};
  });
}

hsl_status hsl_derived_step_size(double L, double sigma_sq, double H_sq, double delta0,
                                  uint64_t T, uint32_t n_s, const hsl_beta_bounds* beta,
                                  double* gamma) {
  HSL_REQUIRE(beta && gamma);
  return guarded([&] {
    const hsl::ProblemConstants c{L, sigma_sq, H_sq, delta0, static_cast<std::size_t>(T), n_s};
    *gamma = hsl::derived_step_size(c, to_cpp(*beta));
  });
}

hsl_status hsl_consensus_bound(const hsl_beta_bounds* beta, double gamma, double sigma_sq,
                               double H_sq, double* bound) {
  HSL_REQUIRE(beta && bound);
  return guarded([&] { *bound = hsl::consensus_bound(to_cpp(*beta), gamma, sigma_sq, H_sq); });
}

hsl_status hsl_spectral_gap(hsl_matrix m, double* gap) {
  HSL_REQUIRE(m && gap);
  return guarded([&] { *gap = hsl::spectral_gap(m->value); });
}

hsl_status hsl_average_spectral_gap(const hsl_topology_config* config, uint64_t rounds,
                                    uint64_t seed, double* mean_gap, double* std_gap) {
  HSL_REQUIRE(config && mean_gap && std_gap);
  return guarded([&] {
    const auto c = to_cpp(*config);
    c.validate();
    const auto report = hsl::average_spectral_gap(c, static_cast<std::size_t>(rounds), seed);
    *mean_gap = report.mean_gap;
    *std_gap = report.std_gap;
  });
}

hsl_status hsl_spec_parse(const char* text, hsl_spec* out) {
  HSL_REQUIRE(text && out);
  return guarded([&] {
    auto spec = hsl::parse_config(text);
    std::string command(hsl::to_string(spec.command));
    *out = new hsl_spec_t{std::move(spec), std::move(command)};
  });
}

hsl_status hsl_spec_load(const char* path, hsl_spec* out) {
  HSL_REQUIRE(path && out);
  return guarded([&] {
    auto spec = hsl::load_config_file(path);
    std::string command(hsl::to_string(spec.command));
    *out = new hsl_spec_t{std::move(spec), std::move(command)};
  });
}

hsl_status hsl_spec_set_seed(hsl_spec spec, uint64_t seed) {
  HSL_REQUIRE(spec);
  return guarded([&] {
    spec->value.seed = seed;
    spec->value.training.seed = seed;
    spec->value.validate();
  });
}

hsl_status hsl_spec_set_output_dir(hsl_spec spec, const char* dir) {
  HSL_REQUIRE(spec && dir);
  return guarded([&] {
    auto updated = spec->value;
    updated.output_dir = dir;
    updated.validate();
    spec->value = std::move(updated);
  });
}

hsl_status hsl_spec_command(hsl_spec spec, const char** command) {
  HSL_REQUIRE(spec && command);
  *command = spec->command.c_str();
  return HSL_OK;
}

hsl_status hsl_spec_serialize(hsl_spec spec, char* buf, size_t cap, size_t* needed) {
  HSL_REQUIRE(spec && needed && (buf || cap == 0));
  std::string text;
  const auto status = guarded([&] { text = hsl::serialize_config(spec->value); });
  if (status != HSL_OK) return status;
  *needed = text.size() + 1;
  if (cap < *needed) return fail(HSL_ERR_BUFFER_TOO_SMALL, "buffer too small for spec text");
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return HSL_OK;
}

void hsl_spec_destroy(hsl_spec spec) { delete spec; }

hsl_status hsl_execute(hsl_spec spec, hsl_manifest* out) {
  HSL_REQUIRE(spec && out);
  return guarded([&] {
    auto manifest = hsl::execute(spec->value);
    std::string path = manifest.path.string();
    *out = new hsl_manifest_t{std::move(manifest), std::move(path)};
  });
}

hsl_status hsl_manifest_failed(hsl_manifest m, int* failed, const char** reason) {
  HSL_REQUIRE(m && failed);
  *failed = m->value.failed ? 1 : 0;
  if (reason) *reason = m->value.failure.c_str();
  return HSL_OK;
}

hsl_status hsl_manifest_path(hsl_manifest m, const char** path) {
  HSL_REQUIRE(m && path);
  *path = m->path.c_str();
  return HSL_OK;
}

hsl_status hsl_manifest_file_count(hsl_manifest m, size_t* count) {
  HSL_REQUIRE(m && count);
  *count = m->value.files.size();
  return HSL_OK;
}

hsl_status hsl_manifest_file(hsl_manifest m, size_t index, const char** name,
                             const char** sha256) {
  HSL_REQUIRE(m && name && sha256);
  if (index >= m->value.files.size()) {
    return fail(HSL_ERR_INVALID_ARGUMENT, "manifest file index out of range");
  }
  *name = m->value.files[index].file.c_str();
  *sha256 = m->value.files[index].sha256.c_str();
  return HSL_OK;
}

void hsl_manifest_destroy(hsl_manifest m) { delete m; }

}  // extern "C"
