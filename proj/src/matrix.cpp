#include "absaudit/matrix.hpp"

#include <cmath>

#include "absaudit/error.hpp"
#include "absaudit/limits.hpp"

namespace absaudit {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_function(const std::vector<std::optional<std::size_t>>& targets, std::size_t cols) {
  Matrix m(targets.size(), cols);
  for (std::size_t r = 0; r < targets.size(); ++r) {
    if (!targets[r]) continue;
    if (*targets[r] >= cols) throw InvalidArgument("function target out of range");
    m(r, *targets[r]) = 1.0;
  }
  return m;
}

double Matrix::row_sum(std::size_t r) const {
  double s = 0.0;
  for (double v : row(r)) s += v;
  return s;
}

bool Matrix::row_is_zero(std::size_t r) const {
  for (double v : row(r)) {
    if (v != 0.0) return false;
  }
  return true;
}

std::optional<std::size_t> Matrix::one_hot_column(std::size_t r) const {
  std::optional<std::size_t> hit;
  for (std::size_t c = 0; c < cols_; ++c) {
    double v = (*this)(r, c);
    if (v == 0.0) continue;
    if (hit || std::abs(v - 1.0) > kTolerance) return std::nullopt;
    hit = c;
  }
  return hit;
}

bool Matrix::is_deterministic() const {
  for (std::size_t r = 0; r < rows_; ++r) {
    if (!row_is_zero(r) && !one_hot_column(r)) return false;
  }
  return true;
}

bool Matrix::is_total() const {
  for (std::size_t r = 0; r < rows_; ++r) {
    if (row_is_zero(r)) return false;
  }
  return true;
}

Matrix multiply(const Matrix& lhs, const Matrix& rhs) {
  if (lhs.cols() != rhs.rows()) throw InvalidArgument("matrix product shape mismatch");
  Matrix out(lhs.rows(), rhs.cols());
  for (std::size_t i = 0; i < lhs.rows(); ++i) {
    for (std::size_t k = 0; k < lhs.cols(); ++k) {
      double a = lhs(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < rhs.cols(); ++j) out(i, j) += a * rhs(k, j);
    }
  }
  return out;
}

Matrix kronecker(const Matrix& lhs, const Matrix& rhs) {
  Matrix out(lhs.rows() * rhs.rows(), lhs.cols() * rhs.cols());
  for (std::size_t i = 0; i < lhs.rows(); ++i)
    for (std::size_t j = 0; j < lhs.cols(); ++j) {
      double a = lhs(i, j);
      if (a == 0.0) continue;
      for (std::size_t k = 0; k < rhs.rows(); ++k)
        for (std::size_t l = 0; l < rhs.cols(); ++l)
          out(i * rhs.rows() + k, j * rhs.cols() + l) = a * rhs(k, l);
    }
  return out;
}

bool approx_equal(const Matrix& lhs, const Matrix& rhs, double tolerance) {
  if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols()) return false;
  for (std::size_t i = 0; i < lhs.rows(); ++i)
    for (std::size_t j = 0; j < lhs.cols(); ++j)
      if (std::abs(lhs(i, j) - rhs(i, j)) > tolerance) return false;
  return true;
}

}  // namespace absaudit
