#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace absaudit {

/// Dense row-major matrix of probabilities. Used for Markov kernels, node
/// maps and outcome maps. An all-zero row marks an unmapped element.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix identity(std::size_t n);
  /// One-hot rows: row r has a 1 in column targets[r], or is all-zero when
  /// targets[r] is empty.
  static Matrix from_function(const std::vector<std::optional<std::size_t>>& targets, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  double row_sum(std::size_t r) const;
  /// True when every entry of the row is exactly zero.
  bool row_is_zero(std::size_t r) const;
  /// Column of the single nonzero entry when the row is one-hot (within tolerance).
  std::optional<std::size_t> one_hot_column(std::size_t r) const;
  /// Every nonzero row is one-hot.
  bool is_deterministic() const;
  /// No all-zero rows.
  bool is_total() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Ordinary matrix product; throws InvalidArgument on a shape mismatch.
Matrix multiply(const Matrix& lhs, const Matrix& rhs);

/// Kronecker product: row index is row-major over (lhs row, rhs row), same for columns.
Matrix kronecker(const Matrix& lhs, const Matrix& rhs);

/// Entry-wise comparison within tolerance.
bool approx_equal(const Matrix& lhs, const Matrix& rhs, double tolerance);

}  // namespace absaudit
