#include "sage/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sage {

void SageConfig::validate() const {
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must be in (0,1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must be in (0,1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
}

void SinkGDConfig::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("sinkgd alpha must be > 0");
  if (iterations < 1) throw ConfigError("sinkgd iterations must be >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("sinkgd epsilon must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("sinkgd weight_decay must be >= 0");
}

void LrSchedule::validate() const {
  if (!(eta_max > 0.0)) throw ConfigError("eta_max must be > 0");
  if (total_steps < 0) throw ConfigError("total_steps must be >= 0");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    throw ConfigError("warmup_fraction must be in [0,1)");
  }
  if (!(eta_min >= 0.0 && eta_min <= eta_max)) {
    throw ConfigError("eta_min must be in [0, eta_max]");
  }
}

double lr_at(const LrSchedule& schedule, std::int64_t t) {
  schedule.validate();
  if (t < 1 || t > schedule.total_steps) {
    throw UsageError("lr_at: step outside [1, total_steps]");
  }
  std::int64_t warmup = static_cast<std::int64_t>(
      std::ceil(schedule.warmup_fraction * static_cast<double>(schedule.total_steps)));
  warmup = std::min(warmup, schedule.total_steps - 1);
  if (t <= warmup) {
    return schedule.eta_max * static_cast<double>(t) / static_cast<double>(warmup);
  }
  const double progress = static_cast<double>(t - warmup) /
                          static_cast<double>(schedule.total_steps - warmup);
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return schedule.eta_min + (schedule.eta_max - schedule.eta_min) * cosine;
}

namespace {

void decay_span(std::span<double> theta, double eta, double w) {
  if (w < 0.0) throw ConfigError("weight_decay: w must be >= 0");
  const double mult = 1.0 - eta * w;
  if (!(mult > 0.0)) throw ConfigError("weight_decay: eta * w must be < 1");
  if (w == 0.0) return;
  for (double& v : theta) {
    v *= mult;
  }
}

struct SignFamilyView {
  std::span<double> theta;
  std::span<const double> g;
  std::span<double> m;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// Full adaptive update. The 1D path is the rows == 1 case: the column mean of
// a single row equals |g| entrywise, so one kernel serves both branches.
SageStepReport sage_apply(const SignFamilyView& view, DamperState& damper,
                          const SageConfig& cfg, double eta) {
  decay_span(view.theta, eta, cfg.weight_decay);
  const std::size_t rows = view.rows;
  const std::size_t cols = view.cols;

  Vector h(cols, 1.0);
  Matrix h_elem;
  if (cfg.damping) {
    Vector s(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        s[j] += std::abs(view.g[i * cols + j]);
      }
    }
    const double inv_rows = 1.0 / static_cast<double>(rows);
    for (std::size_t j = 0; j < cols; ++j) {
      s[j] *= inv_rows;
    }
    const Vector s_hat = update_state(damper, s);
    if (cfg.instant_per_element) {
      // EMA damper per dimension, instantaneous damper per element with the
      // whole-tensor RMS as the reference.
      const double sigma_rms = rms(s_hat);
      double acc = 0.0;
      for (double gv : view.g) {
        acc += gv * gv;
      }
      const double gamma_rms = std::sqrt(acc / static_cast<double>(view.g.size()));
      h_elem = Matrix(rows, cols);
      // The reported h degrades to the column minimum of the element scales.
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
          const double d_ema = sigma_rms / (s_hat[j] + cfg.epsilon);
          const double d_inst = gamma_rms / (std::abs(view.g[i * cols + j]) + cfg.epsilon);
          const double value = std::min({d_ema, d_inst, 1.0});
          h_elem(i, j) = value;
          h[j] = std::min(h[j], value);
        }
      }
    } else {
      h = compute_scale(s_hat, s, cfg.epsilon);
    }
  }

  double uinf = 0.0;
  const bool per_elem = cfg.damping && cfg.instant_per_element;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t idx = i * cols + j;
      const double interp = cfg.beta1 * view.m[idx] + (1.0 - cfg.beta1) * view.g[idx];
      const double c = sign_of(interp);
      const double u = c * (per_elem ? h_elem(i, j) : h[j]);
      view.theta[idx] -= eta * u;
      uinf = std::max(uinf, std::abs(u));
      view.m[idx] = cfg.beta2 * view.m[idx] + (1.0 - cfg.beta2) * view.g[idx];
    }
  }
  return {uinf, std::move(h)};
}

double lion_apply(const SignFamilyView& view, const SageConfig& cfg, double eta) {
  decay_span(view.theta, eta, cfg.weight_decay);
  double uinf = 0.0;
  for (std::size_t idx = 0; idx < view.theta.size(); ++idx) {
    const double interp = cfg.beta1 * view.m[idx] + (1.0 - cfg.beta1) * view.g[idx];
    const double c = sign_of(interp);
    view.theta[idx] -= eta * c;
    uinf = std::max(uinf, std::abs(c));
    view.m[idx] = cfg.beta2 * view.m[idx] + (1.0 - cfg.beta2) * view.g[idx];
  }
  return uinf;
}

double adamw_apply(std::span<double> theta, std::span<const double> g,
                   std::span<double> m, std::span<double> v,
                   const SageConfig& cfg, double eta, std::int64_t t) {
  if (t < 1) throw UsageError("adamw: step counter must be >= 1");
  decay_span(theta, eta, cfg.weight_decay);
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  double uinf = 0.0;
  for (std::size_t idx = 0; idx < theta.size(); ++idx) {
    m[idx] = cfg.beta1 * m[idx] + (1.0 - cfg.beta1) * g[idx];
    v[idx] = cfg.beta2 * v[idx] + (1.0 - cfg.beta2) * g[idx] * g[idx];
    const double m_hat = m[idx] / bc1;
    const double v_hat = v[idx] / bc2;
    const double u = m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    theta[idx] -= eta * u;
    uinf = std::max(uinf, std::abs(u));
  }
  return uinf;
}

void require_same_shape(const Matrix& theta, const Matrix& g, const char* what) {
  if (theta.rows() != g.rows() || theta.cols() != g.cols()) {
    throw DimensionError(std::string(what) + ": parameter/gradient shape mismatch");
  }
}

void require_same_shape(const Vector& theta, const Vector& g, const char* what) {
  if (theta.size() != g.size()) {
    throw DimensionError(std::string(what) + ": parameter/gradient length mismatch");
  }
}

void require_finite(const Matrix& g, const char* what) {
  if (!g.all_finite()) {
    throw InvalidValueError(std::string(what) + ": non-finite gradient");
  }
}

void require_finite(const Vector& g, const char* what) {
  if (!g.all_finite()) {
    throw InvalidValueError(std::string(what) + ": non-finite gradient");
  }
}

void check_sage_role_2d(ParamRole role) {
  if (role == ParamRole::Dense2D) {
    throw UsageError("sage_step: dense 2D parameters take the SinkGD path");
  }
  if (role != ParamRole::Embedding2D) {
    throw DimensionError("sage_step: 2D parameter requires the Embedding2D role");
  }
}

void check_sage_role_1d(ParamRole role) {
  if (role == ParamRole::Dense2D) {
    throw UsageError("sage_step: dense 2D parameters take the SinkGD path");
  }
  if (role != ParamRole::OneD) {
    throw DimensionError("sage_step: 1D parameter requires the OneD role");
  }
}

void normalize_rows_inplace(Matrix& u, double epsilon) {
  for (std::size_t i = 0; i < u.rows(); ++i) {
    auto row = u.row(i);
    double acc = 0.0;
    for (double v : row) {
      acc += v * v;
    }
    const double norm = std::sqrt(acc);
    if (norm <= epsilon) {
      for (double& v : row) v = 0.0;
    } else {
      for (double& v : row) v /= norm;
    }
  }
}

void normalize_cols_inplace(Matrix& u, double epsilon) {
  for (std::size_t j = 0; j < u.cols(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.rows(); ++i) {
      acc += u(i, j) * u(i, j);
    }
    const double norm = std::sqrt(acc);
    if (norm <= epsilon) {
      for (std::size_t i = 0; i < u.rows(); ++i) u(i, j) = 0.0;
    } else {
      for (std::size_t i = 0; i < u.rows(); ++i) u(i, j) /= norm;
    }
  }
}

}  // namespace

void weight_decay(Matrix& theta, double eta, double w) {
  decay_span(theta.raw(), eta, w);
}

void weight_decay(Vector& theta, double eta, double w) {
  decay_span(theta.raw(), eta, w);
}

SageStepReport sage_step(Matrix& theta, const Matrix& g, SageState2D& state,
                         const SageConfig& cfg, double eta, ParamRole role) {
  cfg.validate();
  check_sage_role_2d(role);
  require_same_shape(theta, g, "sage_step");
  require_same_shape(state.m, g, "sage_step momentum");
  if (state.damper.s_ema.size() != g.cols()) {
    throw DimensionError("sage_step: damper length differs from column count");
  }
  require_finite(g, "sage_step");
  return sage_apply({theta.raw(), g.raw(), state.m.raw(), g.rows(), g.cols()},
                    state.damper, cfg, eta);
}

SageStepReport sage_step(Vector& theta, const Vector& g, SageState1D& state,
                         const SageConfig& cfg, double eta, ParamRole role) {
  cfg.validate();
  check_sage_role_1d(role);
  require_same_shape(theta, g, "sage_step");
  require_same_shape(state.m, g, "sage_step momentum");
  if (state.damper.s_ema.size() != g.size()) {
    throw DimensionError("sage_step: damper length differs from parameter length");
  }
  require_finite(g, "sage_step");
  return sage_apply({theta.raw(), g.raw(), state.m.raw(), 1, g.size()},
                    state.damper, cfg, eta);
}

double lion_step(Matrix& theta, const Matrix& g, LionState2D& state,
                 const SageConfig& cfg, double eta) {
  cfg.validate();
  require_same_shape(theta, g, "lion_step");
  require_same_shape(state.m, g, "lion_step momentum");
  require_finite(g, "lion_step");
  return lion_apply({theta.raw(), g.raw(), state.m.raw(), g.rows(), g.cols()}, cfg, eta);
}

double lion_step(Vector& theta, const Vector& g, LionState1D& state,
                 const SageConfig& cfg, double eta) {
  cfg.validate();
  require_same_shape(theta, g, "lion_step");
  require_same_shape(state.m, g, "lion_step momentum");
  require_finite(g, "lion_step");
  return lion_apply({theta.raw(), g.raw(), state.m.raw(), 1, g.size()}, cfg, eta);
}

double adamw_step(Matrix& theta, const Matrix& g, AdamWState2D& state,
                  const SageConfig& cfg, double eta, std::int64_t t) {
  cfg.validate();
  require_same_shape(theta, g, "adamw_step");
  require_same_shape(state.m, g, "adamw_step moment");
  require_finite(g, "adamw_step");
  return adamw_apply(theta.raw(), g.raw(), state.m.raw(), state.v.raw(), cfg, eta, t);
}

double adamw_step(Vector& theta, const Vector& g, AdamWState1D& state,
                  const SageConfig& cfg, double eta, std::int64_t t) {
  cfg.validate();
  require_same_shape(theta, g, "adamw_step");
  require_same_shape(state.m, g, "adamw_step moment");
  require_finite(g, "adamw_step");
  return adamw_apply(theta.raw(), g.raw(), state.m.raw(), state.v.raw(), cfg, eta, t);
}

Matrix sinkgd_normalize(const Matrix& g, const SinkGDConfig& cfg) {
  cfg.validate();
  if (g.rows() == 0 || g.cols() == 0) {
    throw DimensionError("sinkgd_normalize: empty matrix");
  }
  const bool flip = g.rows() > g.cols();
  Matrix u = flip ? transpose(g) : g;
  // With a single row the unit-row projection is the whole problem; a column
  // pass would erase the row's direction, so it is skipped.
  const bool column_passes = u.rows() > 1;
  for (int pass = 0; pass < cfg.iterations; ++pass) {
    if (column_passes) normalize_cols_inplace(u, cfg.epsilon);
    normalize_rows_inplace(u, cfg.epsilon);
  }
  return flip ? transpose(u) : u;
}

double sinkgd_step(Matrix& theta, const Matrix& g, const SinkGDConfig& cfg, double eta) {
  cfg.validate();
  require_same_shape(theta, g, "sinkgd_step");
  require_finite(g, "sinkgd_step");
  weight_decay(theta, eta, cfg.weight_decay);
  const Matrix u = sinkgd_normalize(g, cfg);
  auto th = theta.raw();
  auto ur = u.raw();
  double uinf = 0.0;
  for (std::size_t idx = 0; idx < th.size(); ++idx) {
    const double step = cfg.alpha * ur[idx];
    th[idx] -= eta * step;
    uinf = std::max(uinf, std::abs(step));
  }
  return uinf;
}

double sinkgd_step(Vector&, const Vector&, const SinkGDConfig&, double) {
  throw UsageError("sinkgd_step: 1D parameters are not normalizable, use AdamW or SAGE");
}

std::string to_string(Algo algo) {
  switch (algo) {
    case Algo::Sage: return "sage";
    case Algo::Lion: return "lion";
    case Algo::AdamW: return "adamw";
    case Algo::SinkGD: return "sinkgd";
  }
  throw UsageError("unknown algorithm");
}

std::string to_string(Policy policy) {
  switch (policy) {
    case Policy::SageHybrid: return "sage-hybrid";
    case Policy::SinkGDHybrid: return "sinkgd-hybrid";
    case Policy::LionHybrid: return "lion-hybrid";
    case Policy::SagePure: return "sage-pure";
    case Policy::SinkGDPure: return "sinkgd-pure";
    case Policy::Lion: return "lion";
    case Policy::AdamW: return "adamw";
    case Policy::Apollo: return "apollo";
  }
  throw UsageError("unknown policy");
}

Policy policy_from_string(std::string_view name) {
  if (name == "sage-hybrid") return Policy::SageHybrid;
  if (name == "sinkgd-hybrid") return Policy::SinkGDHybrid;
  if (name == "lion-hybrid") return Policy::LionHybrid;
  if (name == "sage-pure") return Policy::SagePure;
  if (name == "sinkgd-pure") return Policy::SinkGDPure;
  if (name == "lion") return Policy::Lion;
  if (name == "adamw") return Policy::AdamW;
  if (name == "apollo") return Policy::Apollo;
  throw ConfigError("unknown policy name: " + std::string(name));
}

std::vector<Policy> supported_policies() {
  return {Policy::SageHybrid, Policy::SinkGDHybrid, Policy::LionHybrid,
          Policy::SagePure,   Policy::SinkGDPure,   Policy::Lion,
          Policy::AdamW};
}

Algo hybrid_assign(ParamRole role, Policy policy) {
  switch (policy) {
    case Policy::SageHybrid:
      return role == ParamRole::Dense2D ? Algo::SinkGD : Algo::Sage;
    case Policy::SinkGDHybrid:
      return role == ParamRole::Dense2D ? Algo::SinkGD : Algo::AdamW;
    case Policy::LionHybrid:
      if (role == ParamRole::Dense2D) return Algo::SinkGD;
      return role == ParamRole::Embedding2D ? Algo::Lion : Algo::AdamW;
    case Policy::SagePure:
      return Algo::Sage;
    case Policy::SinkGDPure:
      return role == ParamRole::OneD ? Algo::AdamW : Algo::SinkGD;
    case Policy::Lion:
      return Algo::Lion;
    case Policy::AdamW:
      return Algo::AdamW;
    case Policy::Apollo:
      break;
  }
  throw UnsupportedPolicyError("policy apollo is not supported");
}

HybridOptimizer::HybridOptimizer(Policy policy, LrSchedule schedule, HybridConfig cfg)
    : policy_(policy), schedule_(schedule), cfg_(cfg) {
  schedule_.validate();
  cfg_.optimizer.validate();
  cfg_.sinkgd.validate();
  if (policy_ == Policy::Apollo) {
    throw UnsupportedPolicyError("policy apollo is not supported");
  }
}

std::size_t HybridOptimizer::add_parameter(std::string name, Matrix& param, ParamRole role) {
  if (t_ != 0) throw UsageError("add_parameter: optimizer already stepped");
  if (role == ParamRole::OneD) {
    throw DimensionError("add_parameter: 2D parameter cannot take the OneD role");
  }
  Slot slot;
  slot.name = std::move(name);
  slot.role = role;
  slot.algo = hybrid_assign(role, policy_);
  slot.mat = &param;
  switch (slot.algo) {
    case Algo::Sage:
      slot.m_mat = Matrix(param.rows(), param.cols());
      slot.damper.emplace(param.cols(), cfg_.optimizer.beta2, cfg_.optimizer.epsilon);
      break;
    case Algo::Lion:
      slot.m_mat = Matrix(param.rows(), param.cols());
      break;
    case Algo::AdamW:
      slot.m_mat = Matrix(param.rows(), param.cols());
      slot.v_mat = Matrix(param.rows(), param.cols());
      break;
    case Algo::SinkGD:
      break;
  }
  slots_.push_back(std::move(slot));
  return slots_.size() - 1;
}

std::size_t HybridOptimizer::add_parameter(std::string name, Vector& param, ParamRole role) {
  if (t_ != 0) throw UsageError("add_parameter: optimizer already stepped");
  if (role != ParamRole::OneD) {
    throw DimensionError("add_parameter: 1D parameter requires the OneD role");
  }
  Slot slot;
  slot.name = std::move(name);
  slot.role = role;
  slot.algo = hybrid_assign(role, policy_);
  if (policy_ == Policy::SageHybrid && cfg_.one_d_adamw) {
    slot.algo = Algo::AdamW;
  }
  slot.vec = &param;
  switch (slot.algo) {
    case Algo::Sage:
      slot.m_vec = Vector(param.size());
      slot.damper.emplace(param.size(), cfg_.optimizer.beta2, cfg_.optimizer.epsilon);
      break;
    case Algo::Lion:
      slot.m_vec = Vector(param.size());
      break;
    case Algo::AdamW:
      slot.m_vec = Vector(param.size());
      slot.v_vec = Vector(param.size());
      break;
    case Algo::SinkGD:
      throw UsageError("add_parameter: SinkGD never applies to 1D parameters");
  }
  slots_.push_back(std::move(slot));
  return slots_.size() - 1;
}

Algo HybridOptimizer::slot_algo(std::size_t index) const {
  if (index >= slots_.size()) throw UsageError("slot_algo: index out of range");
  return slots_[index].algo;
}

StepReport HybridOptimizer::step(std::span<const SlotGrad> grads) {
  if (grads.size() != slots_.size()) {
    throw UsageError("hybrid step: expected one gradient per slot");
  }
  t_ += 1;
  const double eta = lr_at(schedule_, t_);
  StepReport report;
  report.t = t_;
  report.eta = eta;
  report.slots.reserve(slots_.size());

  for (std::size_t i = 0; i < slots_.size(); ++i) {
    Slot& slot = slots_[i];
    const SlotGrad& grad = grads[i];
    SlotReport sr;
    sr.name = slot.name;
    sr.algo = slot.algo;

    if (slot.mat != nullptr) {
      if (grad.mat == nullptr) {
        throw UsageError("hybrid step: missing 2D gradient for slot " + slot.name);
      }
      const Matrix& g = *grad.mat;
      require_same_shape(*slot.mat, g, "hybrid step");
      require_finite(g, "hybrid step");
      switch (slot.algo) {
        case Algo::Sage: {
          // Dense 2D slots appear here only under the pure-SAGE policy and
          // follow the 2D branch: per-column signal, damper of length cols.
          SageStepReport rep =
              sage_apply({slot.mat->raw(), g.raw(), slot.m_mat.raw(), g.rows(), g.cols()},
                         *slot.damper, cfg_.optimizer, eta);
          sr.update_inf_norm = rep.update_inf_norm;
          sr.h = std::move(rep.h);
          break;
        }
        case Algo::Lion:
          sr.update_inf_norm = lion_apply(
              {slot.mat->raw(), g.raw(), slot.m_mat.raw(), g.rows(), g.cols()},
              cfg_.optimizer, eta);
          break;
        case Algo::AdamW:
          sr.update_inf_norm =
              adamw_apply(slot.mat->raw(), g.raw(), slot.m_mat.raw(), slot.v_mat.raw(),
                          cfg_.optimizer, eta, t_);
          break;
        case Algo::SinkGD:
          sr.update_inf_norm = sinkgd_step(*slot.mat, g, cfg_.sinkgd, eta);
          break;
      }
    } else {
      if (grad.vec == nullptr) {
        throw UsageError("hybrid step: missing 1D gradient for slot " + slot.name);
      }
      const Vector& g = *grad.vec;
      require_same_shape(*slot.vec, g, "hybrid step");
      require_finite(g, "hybrid step");
      switch (slot.algo) {
        case Algo::Sage: {
          SageStepReport rep = sage_apply({slot.vec->raw(), g.raw(), slot.m_vec.raw(), 1, g.size()},
                                          *slot.damper, cfg_.optimizer, eta);
          sr.update_inf_norm = rep.update_inf_norm;
          sr.h = std::move(rep.h);
          break;
        }
        case Algo::Lion:
          sr.update_inf_norm = lion_apply({slot.vec->raw(), g.raw(), slot.m_vec.raw(), 1, g.size()},
                                          cfg_.optimizer, eta);
          break;
        case Algo::AdamW:
          sr.update_inf_norm =
              adamw_apply(slot.vec->raw(), g.raw(), slot.m_vec.raw(), slot.v_vec.raw(),
                          cfg_.optimizer, eta, t_);
          break;
        case Algo::SinkGD:
          throw UsageError("hybrid step: SinkGD never applies to 1D parameters");
      }
    }
    report.slots.push_back(std::move(sr));
  }
  return report;
}

}  // namespace sage
