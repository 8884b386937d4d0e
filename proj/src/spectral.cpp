#include "hsl/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>

#include "hsl/error.hpp"
#include "hsl/parallel.hpp"

namespace hsl {

std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw ContractViolation("eigenvalues: matrix is not square");
  const auto n = static_cast<Eigen::Index>(m.rows());
  Eigen::MatrixXd dense(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) dense(i, j) = m(i, j);
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw ContractViolation("eigenvalues: QR iteration did not converge");
  }
  const auto& values = solver.eigenvalues();
  return {values.data(), values.data() + values.size()};
}

double spectral_gap(const Matrix& w) {
  if (w.rows() != w.cols()) throw ContractViolation("spectral_gap: matrix is not square");
  if (w.rows() <= 1) return 1.0;
  const auto values = eigenvalues(w);
  std::vector<double> moduli(values.size());
  std::transform(values.begin(), values.end(), moduli.begin(),
                 [](std::complex<double> v) { return std::abs(v); });
  std::partial_sort(moduli.begin(), moduli.begin() + 2, moduli.end(), std::greater<>());
  return std::clamp(1.0 - moduli[1], 0.0, 1.0);
}

SpectralReport average_spectral_gap(const TopologyConfig& config, std::size_t rounds,
                                    std::uint64_t master_seed) {
  if (rounds < 1) throw ConfigError("spectral: rounds must be >= 1");
  config.validate();

  std::vector<double> gaps(rounds);
  parallel_for(rounds, [&](std::size_t r) {
    gaps[r] = spectral_gap(sample_effective(config, master_seed, r));
  });

  // Shifted by the first sample so a static topology gives exactly zero spread.
  const double shift = gaps.front();
  const double count = static_cast<double>(rounds);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double g : gaps) {
    sum += g - shift;
    sum_sq += (g - shift) * (g - shift);
  }
  const double mean = shift + sum / count;
  const double sq = std::max(0.0, sum_sq - sum * sum / count);

  SpectralReport report;
  report.config = config;
  report.edges = total_edges(config);
  report.samples = rounds;
  report.mean_gap = mean;
  report.std_gap = rounds > 1 ? std::sqrt(sq / static_cast<double>(rounds - 1)) : 0.0;
  return report;
}

}  // namespace hsl
