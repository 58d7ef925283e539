#include "sage/matrix.hpp"

#include <cmath>

#include "sage/rng.hpp"

namespace sage {

bool Vector::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix Matrix::from(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix out(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) {
      throw DimensionError("Matrix::from: ragged initializer");
    }
    std::size_t j = 0;
    for (double v : row) {
      out(i, j++) = v;
    }
    ++i;
  }
  return out;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out(i, i) = 1.0;
  }
  return out;
}

Matrix sign(const Matrix& x) {
  if (!x.all_finite()) {
    throw InvalidValueError("sign: non-finite entry");
  }
  Matrix out(x.rows(), x.cols());
  auto in = x.raw();
  auto o = out.raw();
  for (std::size_t i = 0; i < in.size(); ++i) {
    o[i] = sign_of(in[i]);
  }
  return out;
}

Vector sign(const Vector& x) {
  if (!x.all_finite()) {
    throw InvalidValueError("sign: non-finite entry");
  }
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = sign_of(x[i]);
  }
  return out;
}

Vector col_abs_mean(const Matrix& x) {
  if (x.rows() == 0 || x.cols() == 0) {
    throw DimensionError("col_abs_mean: empty matrix");
  }
  Vector out(x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = x.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      out[j] += std::abs(row[j]);
    }
  }
  const double inv_rows = 1.0 / static_cast<double>(x.rows());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    out[j] *= inv_rows;
  }
  return out;
}

double rms(const Vector& v) {
  if (v.empty()) {
    throw DimensionError("rms: empty vector");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    acc += v[i] * v[i];
  }
  return std::sqrt(acc / static_cast<double>(v.size()));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ");
  }
  Matrix out(a.rows(), b.cols());
  // i,k,j loop order: for each output entry the k-sum still runs in
  // ascending order, identical to the naive inner-product loop.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto arow = a.row(i);
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = arow[k];
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) {
        orow[j] += aik * brow[j];
      }
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out(j, i) = a(i, j);
    }
  }
  return out;
}

Matrix scale(const Matrix& a, double c) {
  Matrix out(a.rows(), a.cols());
  auto in = a.raw();
  auto o = out.raw();
  for (std::size_t i = 0; i < in.size(); ++i) {
    o[i] = in[i] * c;
  }
  return out;
}

Vector scale(const Vector& a, double c) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = a[i] * c;
  }
  return out;
}

Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols, double stddev) {
  Matrix out(rows, cols);
  for (double& v : out.raw()) {
    v = rng.normal(0.0, stddev);
  }
  return out;
}

Vector gaussian_vector(Rng& rng, std::size_t len, double stddev) {
  Vector out(len);
  for (double& v : out.raw()) {
    v = rng.normal(0.0, stddev);
  }
  return out;
}

}  // namespace sage
