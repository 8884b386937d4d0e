/* C interface to the hubs-and-spokes learning simulator.
 *
 * All functions return an hsl_status. On failure, hsl_last_error() returns a
 * message for the calling thread that stays valid until the next failing call
 * on that thread. Handles are opaque and owned by the caller; release them
 * with the matching *_destroy function (NULL is accepted).
 */
#ifndef HSL_H
#define HSL_H

#include <stddef.h>
#include <stdint.h>

#if defined(HSL_BUILDING_LIBRARY)
#define HSL_API __attribute__((visibility("default")))
#else
#define HSL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hsl_status {
  HSL_OK = 0,
  HSL_ERR_CONFIG = 1,
  HSL_ERR_CONTRACT = 2,
  HSL_ERR_SAMPLING = 3,
  HSL_ERR_DOMAIN = 4,
  HSL_ERR_DIVERGENCE = 5,
  HSL_ERR_IO = 6,
  HSL_ERR_INVALID_ARGUMENT = 7,
  HSL_ERR_BUFFER_TOO_SMALL = 8,
  HSL_ERR_UNKNOWN = 99
} hsl_status;

typedef enum hsl_topology_kind {
  HSL_TOPOLOGY_HSL = 0,
  HSL_TOPOLOGY_EL_LOCAL = 1,
  HSL_TOPOLOGY_EL_ORACLE = 2,
  HSL_TOPOLOGY_ERDOS_RENYI = 3,
  HSL_TOPOLOGY_TORUS = 4,
  HSL_TOPOLOGY_FEDAVG_STAR = 5
} hsl_topology_kind;

typedef struct hsl_topology_config {
  hsl_topology_kind kind;
  uint32_t n_s;
  uint32_t n_h;
  uint32_t b_hs;
  uint32_t b_hh;
  uint32_t b_sh;
  uint32_t k;
  double p;
} hsl_topology_config;

typedef struct hsl_beta_bounds {
  double beta_hs;
  double beta_hh;
  double beta_sh;
  double beta_hsl;
  double beta_prime;
} hsl_beta_bounds;

typedef struct hsl_matrix_t* hsl_matrix;
typedef struct hsl_spec_t* hsl_spec;
typedef struct hsl_manifest_t* hsl_manifest;

HSL_API const char* hsl_version(void);
HSL_API const char* hsl_status_string(hsl_status status);
HSL_API const char* hsl_last_error(void);

/* Matrices (row-major, read-only views) */
HSL_API hsl_status hsl_matrix_shape(hsl_matrix m, size_t* rows, size_t* cols);
HSL_API hsl_status hsl_matrix_data(hsl_matrix m, const double** data);
HSL_API void hsl_matrix_destroy(hsl_matrix m);

/* Topology sampling. `round` selects the per-round child stream of `seed`. */
HSL_API hsl_status hsl_topology_validate(const hsl_topology_config* config);
HSL_API hsl_status hsl_total_edges(const hsl_topology_config* config, uint64_t* edges);
HSL_API hsl_status hsl_sample_push(uint32_t n_s, uint32_t n_h, uint32_t b_hs, uint64_t seed,
                                   uint64_t round, hsl_matrix* out);
HSL_API hsl_status hsl_sample_gossip(uint32_t n, uint32_t b, uint64_t seed, uint64_t round,
                                     hsl_matrix* out);
HSL_API hsl_status hsl_sample_pull(uint32_t n_s, uint32_t n_h, uint32_t b_sh, uint64_t seed,
                                   uint64_t round, hsl_matrix* out);
/* Effective n_s x n_s matrix (composed for HSL, W_t for baselines). */
HSL_API hsl_status hsl_sample_effective(const hsl_topology_config* config, uint64_t seed,
                                        uint64_t round, hsl_matrix* out);

/* Metrics over a row-major n x d model matrix. */
HSL_API hsl_status hsl_consensus_distance(const double* models, size_t n, size_t d,
                                          double* out);
/* Writes the ratio to *ratio and 1 to *defined, or 0 to *defined at exact consensus. */
HSL_API hsl_status hsl_consensus_distance_ratio(double cd_pre, double cd_post, double* ratio,
                                                int* defined);

/* Bounds */
HSL_API hsl_status hsl_beta_bounds_compute(uint32_t n_s, uint32_t n_h, uint32_t b_hs,
                                           uint32_t b_hh, uint32_t b_sh, hsl_beta_bounds* out);
HSL_API hsl_status hsl_derived_step_size(double L, double sigma_sq, double H_sq, double delta0,
                                          uint64_t T, uint32_t n_s, const hsl_beta_bounds* beta,
                                          double* gamma);
HSL_API hsl_status hsl_consensus_bound(const hsl_beta_bounds* beta, double gamma,
                                       double sigma_sq, double H_sq, double* bound);

/* Spectral */
HSL_API hsl_status hsl_spectral_gap(hsl_matrix m, double* gap);
HSL_API hsl_status hsl_average_spectral_gap(const hsl_topology_config* config, uint64_t rounds,
                                            uint64_t seed, double* mean_gap, double* std_gap);

/* Experiment specs */
HSL_API hsl_status hsl_spec_parse(const char* text, hsl_spec* out);
HSL_API hsl_status hsl_spec_load(const char* path, hsl_spec* out);
HSL_API hsl_status hsl_spec_set_seed(hsl_spec spec, uint64_t seed);
HSL_API hsl_status hsl_spec_set_output_dir(hsl_spec spec, const char* dir);
/* Command name: "run", "spectral", "bounds" or "verify". */
HSL_API hsl_status hsl_spec_command(hsl_spec spec, const char** command);
/* Copies the canonical text (NUL-terminated) into buf. *needed receives the
 * required size including the terminator; HSL_ERR_BUFFER_TOO_SMALL if cap is short. */
HSL_API hsl_status hsl_spec_serialize(hsl_spec spec, char* buf, size_t cap, size_t* needed);
HSL_API void hsl_spec_destroy(hsl_spec spec);

/* Execution. A returned manifest may still describe a failed run (divergence,
 * failed verification claims); check hsl_manifest_failed. */
HSL_API hsl_status hsl_execute(hsl_spec spec, hsl_manifest* out);
HSL_API hsl_status hsl_manifest_failed(hsl_manifest m, int* failed, const char** reason);
HSL_API hsl_status hsl_manifest_path(hsl_manifest m, const char** path);
HSL_API hsl_status hsl_manifest_file_count(hsl_manifest m, size_t* count);
HSL_API hsl_status hsl_manifest_file(hsl_manifest m, size_t index, const char** name,
                                     const char** sha256);
HSL_API void hsl_manifest_destroy(hsl_manifest m);

#ifdef __cplusplus
}
#endif

#endif /* HSL_H */
