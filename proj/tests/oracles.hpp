// Independent reference implementations used only by tests. These are written
// against plain nested vectors and textbook formulas so they share no code
// with the library paths they verify.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<double>>;

inline double sgn(double x) {
  if (x > 0.0) return 1.0;
  if (x < 0.0) return -1.0;
  return 0.0;
}

/// Straight-line scalar transcription of the full adaptive sign update for a
/// V x d parameter: decay, column-mean signal, EMA with bias correction,
/// relative-RMS dampers with min clamp, sign momentum, parameter update,
/// momentum update.
struct SageReference {
  Grid m;
  std::vector<double> s_ema;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double wd = 0.01;
  double eps = 1e-8;

  SageReference(std::size_t rows, std::size_t cols, double b1, double b2, double w, double e)
      : m(rows, std::vector<double>(cols, 0.0)),
        s_ema(cols, 0.0),
        beta1(b1),
        beta2(b2),
        wd(w),
        eps(e) {}

  void step(Grid& theta, const Grid& g, double eta) {
    const std::size_t rows = theta.size();
    const std::size_t cols = theta[0].size();
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        theta[i][j] *= (1.0 - eta * wd);
      }
    }
    std::vector<double> s(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
      for (std::size_t i = 0; i < rows; ++i) {
        s[j] += std::abs(g[i][j]);
      }
      s[j] /= static_cast<double>(rows);
    }
    t += 1;
    std::vector<double> s_hat(cols);
    for (std::size_t j = 0; j < cols; ++j) {
      s_ema[j] = beta2 * s_ema[j] + (1.0 - beta2) * s[j];
      s_hat[j] = s_ema[j] / (1.0 - std::pow(beta2, static_cast<double>(t)));
    }
    double sigma = 0.0;
    double gamma = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      sigma += s_hat[j] * s_hat[j];
      gamma += s[j] * s[j];
    }
    sigma = std::sqrt(sigma / static_cast<double>(cols));
    gamma = std::sqrt(gamma / static_cast<double>(cols));
    std::vector<double> h(cols);
    for (std::size_t j = 0; j < cols; ++j) {
      const double d_ema = sigma / (s_hat[j] + eps);
      const double d_inst = gamma / (s[j] + eps);
      h[j] = std::min(std::min(d_ema, d_inst), 1.0);
    }
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        const double c = sgn(beta1 * m[i][j] + (1.0 - beta1) * g[i][j]);
        theta[i][j] -= eta * c * h[j];
        m[i][j] = beta2 * m[i][j] + (1.0 - beta2) * g[i][j];
      }
    }
  }
};

/// Textbook decoupled-decay Adam on a scalar.
struct AdamWScalarReference {
  double m = 0.0;
  double v = 0.0;
  long t = 0;

  double step(double theta, double g, double eta, double beta1, double beta2, double eps,
              double wd) {
    t += 1;
    theta *= (1.0 - eta * wd);
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g * g;
    const double m_hat = m / (1.0 - std::pow(beta1, static_cast<double>(t)));
    const double v_hat = v / (1.0 - std::pow(beta2, static_cast<double>(t)));
    return theta - eta * m_hat / (std::sqrt(v_hat) + eps);
  }
};

/// Brute-force triple-loop product.
inline Grid matmul_reference(const Grid& a, const Grid& b) {
  const std::size_t n = a.size();
  const std::size_t k = b.size();
  const std::size_t m = b[0].size();
  Grid out(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        acc += a[i][p] * b[p][j];
      }
      out[i][j] = acc;
    }
  }
  return out;
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues in descending order with matching eigenvectors as rows.
inline void jacobi_eigen(Grid a, std::vector<double>& values, Grid& vectors) {
  const std::size_t n = a.size();
  Grid v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        off += a[p][q] * a[p][q];
      }
    }
    if (off < 1e-300) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double tan_phi = sgn(theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(tan_phi * tan_phi + 1.0);
        const double s = tan_phi * c;
        const double app = a[p][p];
        const double aqq = a[q][q];
        const double apq = a[p][q];
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = a[p][k] = c * akp - s * akq;
          a[k][q] = a[q][k] = s * akp + c * akq;
        }
        a[p][p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
        a[q][q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
        a[p][q] = a[q][p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  values.assign(n, 0.0);
  vectors.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t rank = 0; rank < n; ++rank) {
    values[rank] = a[order[rank]][order[rank]];
    for (std::size_t k = 0; k < n; ++k) {
      vectors[rank][k] = v[k][order[rank]];
    }
  }
}

}  // namespace oracle
