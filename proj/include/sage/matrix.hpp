#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "sage/error.hpp"

namespace sage {

class Rng;

/// Dense 1D array of doubles.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t len, double fill = 0.0) : data_(len, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> raw() { return data_; }
  std::span<const double> raw() const { return data_; }

  bool all_finite() const;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

/// Dense row-major 2D array of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> raw() { return data_; }
  std::span<const double> raw() const { return data_; }

  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Scalar sign with sign(0) = 0.
inline double sign_of(double v) {
  if (v > 0.0) return 1.0;
  if (v < 0.0) return -1.0;
  return 0.0;
}

/// Entrywise sign mapped to {-1, 0, +1}; sign(0) = 0.
Matrix sign(const Matrix& x);
Vector sign(const Vector& x);

/// Column-wise mean of absolute values: out[j] = (1/rows) * sum_i |x(i,j)|.
Vector col_abs_mean(const Matrix& x);

/// Root mean square sqrt((1/len) * sum v_i^2).
double rms(const Vector& v);

/// Standard matrix product with a fixed left-to-right summation order per
/// output entry, so repeated evaluation is bit-identical.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

Matrix scale(const Matrix& a, double c);
Vector scale(const Vector& a, double c);

Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols, double stddev);
Vector gaussian_vector(Rng& rng, std::size_t len, double stddev);

template <class F>
Matrix elementwise(const Matrix& a, const Matrix& b, F&& op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("elementwise: shape mismatch");
  }
  Matrix out(a.rows(), a.cols());
  auto ar = a.raw();
  auto br = b.raw();
  auto outr = out.raw();
  for (std::size_t i = 0; i < outr.size(); ++i) {
    outr[i] = op(ar[i], br[i]);
  }
  return out;
}

template <class F>
Vector elementwise(const Vector& a, const Vector& b, F&& op) {
  if (a.size() != b.size()) {
    throw DimensionError("elementwise: length mismatch");
  }
  Vector out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = op(a[i], b[i]);
  }
  return out;
}

}  // namespace sage
