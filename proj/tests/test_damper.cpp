#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sage/damper.hpp"
#include "sage/rng.hpp"

using namespace sage;

TEST_CASE("compute_s column mean for embeddings") {
  CHECK(compute_s(Matrix::from({{1, -1}, {3, -3}}), ParamRole::Embedding2D) == Vector{2, 2});
  CHECK(compute_s(Matrix::from({{0, 0}, {0, 0}}), ParamRole::Embedding2D) == Vector{0, 0});
}

TEST_CASE("compute_s absolute value for 1D parameters") {
  CHECK(compute_s(Vector{-0.5, 0.25}, ParamRole::OneD) == Vector{0.5, 0.25});
}

TEST_CASE("compute_s rejects mismatched roles") {
  CHECK_THROWS_AS(compute_s(Matrix(2, 2), ParamRole::Dense2D), UsageError);
  CHECK_THROWS_AS(compute_s(Vector{1.0}, ParamRole::Dense2D), UsageError);
  CHECK_THROWS_AS(compute_s(Matrix(2, 2), ParamRole::OneD), DimensionError);
  CHECK_THROWS_AS(compute_s(Vector{1.0}, ParamRole::Embedding2D), DimensionError);
}

TEST_CASE("update_state bias correction cancels the first step") {
  DamperState state(1, 0.99, 1e-8);
  const Vector s_hat = update_state(state, Vector{1.0});
  CHECK(s_hat[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(state.step == 1);
}

TEST_CASE("update_state constant signal is a fixed point") {
  DamperState state(1, 0.99, 1e-8);
  update_state(state, Vector{1.0});
  const Vector s_hat = update_state(state, Vector{1.0});
  CHECK(s_hat[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(state.step == 2);
}

TEST_CASE("update_state decays a silent dimension") {
  DamperState state(1, 0.9, 1e-8);
  state.s_ema = Vector{0.5};
  state.step = 3;
  const Vector s_hat = update_state(state, Vector{0.0});
  CHECK(state.s_ema[0] == doctest::Approx(0.45).epsilon(1e-15));
  // Desk value: 0.45 / (1 - 0.9^4).
  const double expected = 0.45 / (1.0 - std::pow(0.9, 4));
  CHECK(s_hat[0] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(1.30852).epsilon(1e-5));
}

TEST_CASE("update_state input validation") {
  DamperState state(2, 0.99, 1e-8);
  CHECK_THROWS_AS(update_state(state, Vector{1.0}), DimensionError);
  CHECK_THROWS_AS(update_state(state, Vector{1.0, -0.1}), InvalidValueError);
  CHECK_THROWS_AS(update_state(state, Vector{1.0, std::nan("")}), InvalidValueError);
  CHECK_THROWS_AS(DamperState(2, 1.0, 1e-8), ConfigError);
  CHECK_THROWS_AS(DamperState(2, 0.9, 0.0), ConfigError);
}

TEST_CASE("compute_scale uniform signal stays at full scale") {
  const Vector h = compute_scale(Vector{1, 1}, Vector{1, 1}, 1e-12);
  CHECK(h[0] == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(h[1] == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(h[0] <= 1.0);
}

TEST_CASE("compute_scale damps the loud dimension") {
  // sigma_rms = sqrt((9+16)/2); dim 0 is quiet (clipped at 1), dim 1 loud.
  const Vector h = compute_scale(Vector{3, 4}, Vector{3, 4}, 1e-300);
  const double sigma = std::sqrt(12.5);
  CHECK(h[0] == 1.0);
  CHECK(h[1] == doctest::Approx(sigma / 4.0).epsilon(1e-14));
  CHECK(h[1] == doctest::Approx(0.883883476483184).epsilon(1e-12));
}

TEST_CASE("compute_scale freezes on an all-zero signal") {
  CHECK(compute_scale(Vector{0, 0}, Vector{0, 0}, 1e-8) == Vector{0, 0});
  // Zero EMA alone freezes too, regardless of the instantaneous side.
  const Vector h = compute_scale(Vector{0, 0}, Vector{1, 1}, 1e-8);
  CHECK(h[0] == 0.0);
  // And a zero instantaneous signal freezes a non-zero EMA.
  const Vector h2 = compute_scale(Vector{1, 1}, Vector{0, 0}, 1e-8);
  CHECK(h2[0] == 0.0);
}

TEST_CASE("compute_scale dimension errors") {
  CHECK_THROWS_AS(compute_scale(Vector{1}, Vector{1, 2}, 1e-8), DimensionError);
  CHECK_THROWS_AS(compute_scale(Vector(), Vector(), 1e-8), DimensionError);
}

TEST_CASE("bounded scale over extreme magnitudes") {
  Rng rng(21);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t dim = 1 + static_cast<std::size_t>(rng.uniform01() * 16.0);
    Vector s_hat(dim);
    Vector s(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      const double mag_a = std::pow(10.0, rng.uniform01() * 60.0 - 30.0);
      const double mag_b = std::pow(10.0, rng.uniform01() * 60.0 - 30.0);
      s_hat[j] = rng.uniform01() < 0.05 ? 0.0 : mag_a;
      s[j] = rng.uniform01() < 0.05 ? 0.0 : mag_b;
    }
    const double eps = trial % 2 == 0 ? 1e-8 : 1e-12;
    const Vector h = compute_scale(s_hat, s, eps);
    for (std::size_t j = 0; j < dim; ++j) {
      CHECK(h[j] >= 0.0);
      CHECK(h[j] <= 1.0);
    }
  }
}

TEST_CASE("loud dimensions damped, quiet dimensions at full scale") {
  Rng rng(22);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t dim = 4 + static_cast<std::size_t>(rng.uniform01() * 8.0);
    Vector s_hat(dim);
    Vector s(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      s_hat[j] = std::abs(rng.normal()) + 1e-3;
      s[j] = std::abs(rng.normal()) + 1e-3;
    }
    const double eps = 1e-12;
    const double sigma = rms(s_hat);
    const double gamma = rms(s);
    const Vector h = compute_scale(s_hat, s, eps);
    for (std::size_t j = 0; j < dim; ++j) {
      if (s_hat[j] > sigma && s[j] > gamma) {
        CHECK(h[j] < 1.0);
      }
      if (sigma / (s_hat[j] + eps) >= 1.0 && gamma / (s[j] + eps) >= 1.0) {
        CHECK(h[j] == 1.0);
      }
    }
  }
}

TEST_CASE("scale invariance") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 3 + static_cast<std::size_t>(rng.uniform01() * 6.0);
    Vector s_hat(dim);
    Vector s(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      s_hat[j] = std::abs(rng.normal()) + 1e-3;
      s[j] = std::abs(rng.normal()) + 1e-3;
    }
    const double eps = 1e-12;

    // Power-of-two rescaling commutes with rounding, so equality is exact.
    for (const double c : {1024.0, 1.0 / 1024.0}) {
      const Vector scaled = compute_scale(scale(s_hat, c), scale(s, c), eps);
      const Vector shifted = compute_scale(s_hat, s, eps / c);
      CHECK(scaled == shifted);
    }
    // General positive rescaling agrees to the stated relative tolerance.
    for (const double c : {1e3, 1e-3}) {
      const Vector scaled = compute_scale(scale(s_hat, c), scale(s, c), eps);
      const Vector base = compute_scale(s_hat, s, eps);
      for (std::size_t j = 0; j < dim; ++j) {
        CHECK(scaled[j] == doctest::Approx(base[j]).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("permutation equivariance") {
  Rng rng(24);
  const std::size_t dim = 8;
  Vector s_hat(dim);
  Vector s(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    s_hat[j] = std::abs(rng.normal());
    s[j] = std::abs(rng.normal());
  }
  const Vector h = compute_scale(s_hat, s, 1e-10);

  std::vector<std::size_t> perm{3, 1, 7, 0, 5, 2, 6, 4};
  Vector ps(dim);
  Vector psh(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    psh[j] = s_hat[perm[j]];
    ps[j] = s[perm[j]];
  }
  const Vector ph = compute_scale(psh, ps, 1e-10);
  for (std::size_t j = 0; j < dim; ++j) {
    CHECK(ph[j] == h[perm[j]]);
  }
}

TEST_CASE("EMA stays within the signal bound") {
  Rng rng(25);
  const double bound = 2.5;
  DamperState state(6, 0.95, 1e-8);
  for (int t = 0; t < 400; ++t) {
    Vector s(6);
    for (std::size_t j = 0; j < 6; ++j) {
      s[j] = bound * rng.uniform01();
    }
    const Vector s_hat = update_state(state, s);
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(state.s_ema[j] <= bound * (1.0 + 1e-12));
      CHECK(state.s_ema[j] >= 0.0);
      // Bias correction only inflates, with equality in the zero entries.
      CHECK(s_hat[j] >= state.s_ema[j]);
      if (state.s_ema[j] > 0.0) {
        CHECK(s_hat[j] > state.s_ema[j]);
      }
    }
  }
}
