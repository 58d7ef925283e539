#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "sage/matrix.hpp"
#include "sage/rng.hpp"

using namespace sage;

namespace {

Matrix from_grid(const oracle::Grid& g) {
  Matrix out(g.size(), g.empty() ? 0 : g[0].size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g[i].size(); ++j) {
      out(i, j) = g[i][j];
    }
  }
  return out;
}

oracle::Grid random_grid(Rng& rng, std::size_t rows, std::size_t cols, bool integers) {
  oracle::Grid g(rows, std::vector<double>(cols));
  for (auto& row : g) {
    for (double& v : row) {
      v = integers ? std::floor(rng.uniform01() * 21.0) - 10.0 : rng.normal();
    }
  }
  return g;
}

}  // namespace

TEST_CASE("sign maps entries to -1/0/+1") {
  CHECK(sign(Matrix::from({{-2, 0, 5}})) == Matrix::from({{-1, 0, 1}}));
  CHECK(sign(Matrix::from({{0, 0}, {0, 0}})) == Matrix::from({{0, 0}, {0, 0}}));
  CHECK(sign(Matrix::from({{1e-300}})) == Matrix::from({{1}}));
}

TEST_CASE("sign rejects non-finite entries") {
  CHECK_THROWS_AS(sign(Matrix::from({{std::nan("")}})), InvalidValueError);
  CHECK_THROWS_AS(sign(Matrix::from({{std::numeric_limits<double>::infinity()}})),
                  InvalidValueError);
  CHECK_THROWS_AS(sign(Vector{1.0, -std::numeric_limits<double>::infinity()}),
                  InvalidValueError);
}

TEST_CASE("sign is odd") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix x = gaussian_matrix(rng, 4, 5, 3.0);
    if (trial % 3 == 0) x(trial % 4, trial % 5) = 0.0;
    const Matrix lhs = sign(scale(x, -1.0));
    const Matrix rhs = scale(sign(x), -1.0);
    for (std::size_t i = 0; i < lhs.raw().size(); ++i) {
      CHECK(lhs.raw()[i] == rhs.raw()[i]);
    }
  }
}

TEST_CASE("col_abs_mean hand examples") {
  const Vector a = col_abs_mean(Matrix::from({{1, -1}, {3, -3}}));
  CHECK(a == Vector{2, 2});
  CHECK(col_abs_mean(Matrix::from({{0, 0}})) == Vector{0, 0});
  CHECK(col_abs_mean(Matrix::from({{1, 2}, {3, 4}})) == Vector{2, 3});
  CHECK_THROWS_AS(col_abs_mean(Matrix()), DimensionError);
}

TEST_CASE("col_abs_mean ignores signs and row order") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    oracle::Grid g = random_grid(rng, 6, 4, true);
    const Matrix m = from_grid(g);
    Matrix abs_m = m;
    for (double& v : abs_m.raw()) v = std::abs(v);
    CHECK(col_abs_mean(m) == col_abs_mean(abs_m));

    // Reverse the rows; integer-valued entries keep the sums exact.
    oracle::Grid reversed(g.rbegin(), g.rend());
    CHECK(col_abs_mean(m) == col_abs_mean(from_grid(reversed)));
  }
}

TEST_CASE("rms examples and scaling") {
  CHECK(rms(Vector{1, 1, 1}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rms(Vector{0}) == 0.0);
  CHECK(rms(Vector{3, 4}) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK_THROWS_AS(rms(Vector()), DimensionError);

  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    Vector v = gaussian_vector(rng, 7, 2.0);
    const double c = rng.normal(0.0, 3.0);
    CHECK(rms(scale(v, c)) == doctest::Approx(std::abs(c) * rms(v)).epsilon(1e-12));
  }
}

TEST_CASE("matmul identity, elementwise, scale") {
  const Matrix a = Matrix::from({{1, 2}, {3, 4}});
  CHECK(matmul(Matrix::identity(2), a) == a);
  CHECK(elementwise(Matrix::from({{1, 2}}), Matrix::from({{3, 4}}),
                    [](double x, double y) { return x * y; }) == Matrix::from({{3, 8}}));
  CHECK(scale(Matrix::from({{1, -1}}), 0.0) == Matrix::from({{0, 0}}));
  CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), DimensionError);
  CHECK_THROWS_AS(elementwise(Matrix(1, 2), Matrix(2, 1),
                              [](double x, double y) { return x + y; }),
                  DimensionError);
}

TEST_CASE("matmul matches the brute-force oracle on integers") {
  Rng rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const oracle::Grid a = random_grid(rng, 3, 4, true);
    const oracle::Grid b = random_grid(rng, 4, 5, true);
    const oracle::Grid c = random_grid(rng, 5, 2, true);
    CHECK(matmul(from_grid(a), from_grid(b)) == from_grid(oracle::matmul_reference(a, b)));
    // Associativity is exact for small integer matrices.
    const Matrix left = matmul(matmul(from_grid(a), from_grid(b)), from_grid(c));
    const Matrix right = matmul(from_grid(a), matmul(from_grid(b), from_grid(c)));
    CHECK(left == right);
  }
}

TEST_CASE("reductions are bit-repeatable") {
  Rng rng(15);
  const Matrix a = gaussian_matrix(rng, 8, 8, 1.0);
  const Matrix b = gaussian_matrix(rng, 8, 8, 1.0);
  CHECK(matmul(a, b) == matmul(a, b));
  CHECK(col_abs_mean(a) == col_abs_mean(a));
  Vector v = gaussian_vector(rng, 33, 1.0);
  CHECK(rms(v) == rms(v));
}

TEST_CASE("rng streams are seed-deterministic") {
  Rng a(42);
  Rng b(42);
  Rng c(43);
  bool saw_difference = false;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = a.next_u64();
    CHECK(x == b.next_u64());
    if (x != c.next_u64()) saw_difference = true;
  }
  CHECK(saw_difference);

  Rng d(7);
  Rng e(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = d.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == e.uniform01());
  }
  Rng f(9);
  Rng g(9);
  for (int i = 0; i < 100; ++i) {
    CHECK(f.normal() == g.normal());
  }
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}
