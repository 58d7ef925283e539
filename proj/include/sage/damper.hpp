#pragma once

#include <cstdint>

#include "sage/matrix.hpp"

namespace sage {

/// How a parameter tensor participates in the hybrid dispatch.
enum class ParamRole { Embedding2D, Dense2D, OneD };

/// O(d) damper state: an L1-EMA of the per-dimension gradient magnitude.
///
/// All entries of `s_ema` stay non-negative and never exceed the largest
/// infinity norm seen in the signal stream.
struct DamperState {
  Vector s_ema;            // S, length d
  std::int64_t step = 0;   // t, increments by exactly 1 per update
  double beta2 = 0.99;
  double epsilon = 1e-8;

  DamperState(std::size_t dim, double beta2_in, double epsilon_in);
};

/// Per-dimension signal s_t.
///
/// Embedding2D: column mean of |g| over the row (vocabulary) axis, length
/// cols(g). OneD: |g| entrywise, keeping per-element resolution. Dense 2D
/// parameters never take this path.
Vector compute_s(const Matrix& g, ParamRole role);
Vector compute_s(const Vector& g, ParamRole role);

/// Advances the EMA by one step and returns the bias-corrected state
/// S_hat = S / (1 - beta2^t).
Vector update_state(DamperState& state, const Vector& s_t);

/// Adaptive scale H from the bias-corrected EMA and the instantaneous signal:
///   sigma_rms = rms(S_hat), gamma_rms = rms(s_t)
///   H_j = min(sigma_rms / (S_hat_j + eps), gamma_rms / (s_t_j + eps), 1)
/// Every output entry lies in [0, 1]. An all-zero S_hat (or s_t) makes the
/// corresponding damper 0, freezing the update.
Vector compute_scale(const Vector& s_hat, const Vector& s_t, double epsilon);

}  // namespace sage
