#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "hsl/matrix.hpp"
#include "hsl/topology.hpp"

namespace hsl {

/// All eigenvalues of a square matrix (Hessenberg-QR via Eigen), unordered.
std::vector<std::complex<double>> eigenvalues(const Matrix& m);

/// 1 - |lambda_2|, where lambda_2 is the eigenvalue of second-largest modulus.
/// Clamped to [0, 1]. Throws ContractViolation for a non-square input.
double spectral_gap(const Matrix& w);
inline double spectral_gap(const MixingMatrix& w) { return spectral_gap(w.dense()); }

struct SpectralReport {
  TopologyConfig config;
  std::uint64_t edges = 0;
  std::size_t samples = 0;
  double mean_gap = 0.0;
  double std_gap = 0.0;  ///< sample standard deviation (n - 1 denominator)
};

/// Mean and spread of the spectral gap over `rounds` independently sampled
/// effective matrices. Sample r uses round index r of `master_seed`.
SpectralReport average_spectral_gap(const TopologyConfig& config, std::size_t rounds,
                                    std::uint64_t master_seed);

}  // namespace hsl
