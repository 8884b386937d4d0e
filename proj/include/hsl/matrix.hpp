#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hsl {

/// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  /// Builds from nested rows; all rows must have equal length.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Stacked node states: row i is the parameter vector of node i.
using ModelMatrix = Matrix;

/// a * b with summation in index order. Throws ContractViolation on shape mismatch.
Matrix multiply(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& m) noexcept;

/// Row-stochastic mixing matrix. Construction validates nonnegativity and unit row sums.
class MixingMatrix {
 public:
  static constexpr double kRowSumTolerance = 1e-12;

  MixingMatrix() = default;
  /// Throws ContractViolation if `m` is not row-stochastic within kRowSumTolerance.
  explicit MixingMatrix(Matrix m);

  std::size_t rows() const noexcept { return m_.rows(); }
  std::size_t cols() const noexcept { return m_.cols(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& dense() const noexcept { return m_; }

  std::size_t nonzeros_in_row(std::size_t i) const;
  std::size_t nonzeros() const;

  /// Returns W * X; X must have cols() rows.
  ModelMatrix apply(const ModelMatrix& x) const;

 private:
  Matrix m_;
};

/// True if all entries are >= 0 and every row sums to 1 within `tol`.
bool is_row_stochastic(const Matrix& m, double tol = MixingMatrix::kRowSumTolerance) noexcept;

}  // namespace hsl
