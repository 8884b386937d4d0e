#include "hsl/matrix.hpp"

#include <cmath>
#include <string>

#include "hsl/error.hpp"

namespace hsl {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) {
      throw ContractViolation("Matrix::from_rows: ragged row " + std::to_string(i));
    }
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ContractViolation("multiply: shape mismatch (" + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + ") * (" + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()) + ")");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

bool all_finite(const Matrix& m) noexcept {
  for (double v : m.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool is_row_stochastic(const Matrix& m, double tol) noexcept {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (double v : m.row(i)) {
      if (!(v >= 0.0)) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

MixingMatrix::MixingMatrix(Matrix m) : m_(std::move(m)) {
  if (!is_row_stochastic(m_)) {
    throw ContractViolation("MixingMatrix: matrix is not row-stochastic");
  }
}

std::size_t MixingMatrix::nonzeros_in_row(std::size_t i) const {
  std::size_t count = 0;
  for (double v : m_.row(i)) count += (v != 0.0);
  return count;
}

std::size_t MixingMatrix::nonzeros() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < rows(); ++i) count += nonzeros_in_row(i);
  return count;
}

ModelMatrix MixingMatrix::apply(const ModelMatrix& x) const { return multiply(m_, x); }

}  // namespace hsl
