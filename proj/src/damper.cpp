#include "sage/damper.hpp"

#include <algorithm>
#include <cmath>

namespace sage {

DamperState::DamperState(std::size_t dim, double beta2_in, double epsilon_in)
    : s_ema(dim), beta2(beta2_in), epsilon(epsilon_in) {
  if (!(beta2 > 0.0 && beta2 < 1.0)) {
    throw ConfigError("DamperState: beta2 must be in (0,1)");
  }
  if (!(epsilon > 0.0)) {
    throw ConfigError("DamperState: epsilon must be positive");
  }
}

Vector compute_s(const Matrix& g, ParamRole role) {
  if (role == ParamRole::Dense2D) {
    throw UsageError("compute_s: dense 2D parameters do not use the damper");
  }
  if (role != ParamRole::Embedding2D) {
    throw DimensionError("compute_s: 2D gradient requires the Embedding2D role");
  }
  return col_abs_mean(g);
}

Vector compute_s(const Vector& g, ParamRole role) {
  if (role == ParamRole::Dense2D) {
    throw UsageError("compute_s: dense 2D parameters do not use the damper");
  }
  if (role != ParamRole::OneD) {
    throw DimensionError("compute_s: 1D gradient requires the OneD role");
  }
  Vector out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    out[i] = std::abs(g[i]);
  }
  return out;
}

Vector update_state(DamperState& state, const Vector& s_t) {
  if (s_t.size() != state.s_ema.size()) {
    throw DimensionError("update_state: signal length differs from state length");
  }
  for (std::size_t i = 0; i < s_t.size(); ++i) {
    if (!(s_t[i] >= 0.0)) {
      throw InvalidValueError("update_state: signal entries must be non-negative");
    }
  }
  state.step += 1;
  const double keep = state.beta2;
  const double mix = 1.0 - state.beta2;
  const double correction = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  Vector s_hat(s_t.size());
  for (std::size_t i = 0; i < s_t.size(); ++i) {
    state.s_ema[i] = keep * state.s_ema[i] + mix * s_t[i];
    s_hat[i] = state.s_ema[i] / correction;
  }
  return s_hat;
}

Vector compute_scale(const Vector& s_hat, const Vector& s_t, double epsilon) {
  if (s_hat.size() != s_t.size()) {
    throw DimensionError("compute_scale: length mismatch");
  }
  if (s_hat.empty()) {
    throw DimensionError("compute_scale: empty input");
  }
  const double sigma_rms = rms(s_hat);
  const double gamma_rms = rms(s_t);
  Vector h(s_hat.size());
  for (std::size_t j = 0; j < h.size(); ++j) {
    const double d_ema = sigma_rms / (s_hat[j] + epsilon);
    const double d_inst = gamma_rms / (s_t[j] + epsilon);
    h[j] = std::min({d_ema, d_inst, 1.0});
  }
  return h;
}

}  // namespace sage
