#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sage/damper.hpp"
#include "sage/matrix.hpp"

namespace sage {

/// Shared hyperparameters for the sign family (SAGE, Lion) and AdamW.
struct SageConfig {
  double beta1 = 0.9;
  double beta2 = 0.99;
  double weight_decay = 0.01;
  double epsilon = 1e-8;
  /// When false the adaptive scale is pinned to 1 and SAGE degenerates to Lion.
  bool damping = true;
  /// Instantaneous damper from per-element |g| instead of the per-dimension
  /// signal. Off by default; for 1D parameters the two coincide.
  bool instant_per_element = false;

  void validate() const;

  friend bool operator==(const SageConfig&, const SageConfig&) = default;
};

struct SinkGDConfig {
  double alpha = 10.0;
  int iterations = 3;  // column+row pass pairs; the final pass is a row pass
  double epsilon = 1e-12;
  double weight_decay = 0.01;

  void validate() const;

  friend bool operator==(const SinkGDConfig&, const SinkGDConfig&) = default;
};

/// Linear warmup to eta_max over ceil(warmup_fraction * total_steps) steps,
/// then cosine decay to eta_min at total_steps.
struct LrSchedule {
  double eta_max = 1e-3;
  std::int64_t total_steps = 0;
  double warmup_fraction = 0.1;
  double eta_min = 0.0;

  void validate() const;
};

/// Learning rate at step t, 1 <= t <= total_steps.
double lr_at(const LrSchedule& schedule, std::int64_t t);

struct SageState2D {
  Matrix m;
  DamperState damper;
  SageState2D(std::size_t rows, std::size_t cols, const SageConfig& cfg)
      : m(rows, cols), damper(cols, cfg.beta2, cfg.epsilon) {}
};

struct SageState1D {
  Vector m;
  DamperState damper;
  SageState1D(std::size_t len, const SageConfig& cfg)
      : m(len), damper(len, cfg.beta2, cfg.epsilon) {}
};

struct LionState2D {
  Matrix m;
  LionState2D(std::size_t rows, std::size_t cols) : m(rows, cols) {}
};

struct LionState1D {
  Vector m;
  explicit LionState1D(std::size_t len) : m(len) {}
};

struct AdamWState2D {
  Matrix m, v;
  AdamWState2D(std::size_t rows, std::size_t cols) : m(rows, cols), v(rows, cols) {}
};

struct AdamWState1D {
  Vector m, v;
  explicit AdamWState1D(std::size_t len) : m(len), v(len) {}
};

struct SageStepReport {
  double update_inf_norm = 0.0;
  Vector h;  // adaptive scale applied this step (all ones when damping is off)
};

/// Decoupled decay theta *= (1 - eta * w), applied before the gradient-based
/// update. Requires eta * w < 1.
void weight_decay(Matrix& theta, double eta, double w);
void weight_decay(Vector& theta, double eta, double w);

SageStepReport sage_step(Matrix& theta, const Matrix& g, SageState2D& state,
                         const SageConfig& cfg, double eta, ParamRole role);
SageStepReport sage_step(Vector& theta, const Vector& g, SageState1D& state,
                         const SageConfig& cfg, double eta, ParamRole role);

double lion_step(Matrix& theta, const Matrix& g, LionState2D& state,
                 const SageConfig& cfg, double eta);
double lion_step(Vector& theta, const Vector& g, LionState1D& state,
                 const SageConfig& cfg, double eta);

double adamw_step(Matrix& theta, const Matrix& g, AdamWState2D& state,
                  const SageConfig& cfg, double eta, std::int64_t t);
double adamw_step(Vector& theta, const Vector& g, AdamWState1D& state,
                  const SageConfig& cfg, double eta, std::int64_t t);

/// Alternating column/row L2 normalization of g, ending on a row pass, in the
/// m <= n orientation (tall inputs are transposed in and back out). Rows or
/// columns with norm <= epsilon are flushed to zero, so every output row along
/// the normalized axis is either exactly zero or unit norm.
Matrix sinkgd_normalize(const Matrix& g, const SinkGDConfig& cfg);

/// theta := theta * (1 - eta * w) - eta * alpha * sinkgd_normalize(g).
/// Returns the infinity norm of the applied update alpha * U. Stateless.
double sinkgd_step(Matrix& theta, const Matrix& g, const SinkGDConfig& cfg, double eta);
double sinkgd_step(Vector& theta, const Vector& g, const SinkGDConfig& cfg, double eta);

enum class Algo { Sage, Lion, AdamW, SinkGD };

enum class Policy {
  SageHybrid,
  SinkGDHybrid,
  LionHybrid,
  SagePure,
  SinkGDPure,
  Lion,
  AdamW,
  Apollo,  // recognized, intentionally unsupported
};

std::string to_string(Algo algo);
std::string to_string(Policy policy);
Policy policy_from_string(std::string_view name);
std::vector<Policy> supported_policies();

/// Role-to-algorithm table for each training policy.
Algo hybrid_assign(ParamRole role, Policy policy);

struct HybridConfig {
  SageConfig optimizer;
  SinkGDConfig sinkgd;
  /// Route 1D parameters to AdamW under the SAGE hybrid instead of SAGE.
  bool one_d_adamw = false;
};

/// One gradient per registered slot; exactly one of the pointers is set,
/// matching the slot's parameter kind.
struct SlotGrad {
  const Matrix* mat = nullptr;
  const Vector* vec = nullptr;
};

struct SlotReport {
  std::string name;
  Algo algo = Algo::Sage;
  double update_inf_norm = 0.0;
  std::optional<Vector> h;  // present for SAGE slots
};

struct StepReport {
  std::int64_t t = 0;
  double eta = 0.0;
  std::vector<SlotReport> slots;
};

/// Per-role dispatcher over registered parameter slots with a shared step
/// counter and learning-rate schedule. Parameters are referenced, not owned;
/// they must outlive the optimizer.
class HybridOptimizer {
 public:
  HybridOptimizer(Policy policy, LrSchedule schedule, HybridConfig cfg = {});

  std::size_t add_parameter(std::string name, Matrix& param, ParamRole role);
  std::size_t add_parameter(std::string name, Vector& param, ParamRole role);

  /// Applies one optimizer step to every slot at the shared learning rate.
  StepReport step(std::span<const SlotGrad> grads);

  std::int64_t step_count() const { return t_; }
  Policy policy() const { return policy_; }
  const LrSchedule& schedule() const { return schedule_; }
  std::size_t slot_count() const { return slots_.size(); }
  Algo slot_algo(std::size_t index) const;

 private:
  struct Slot {
    std::string name;
    ParamRole role = ParamRole::OneD;
    Algo algo = Algo::Sage;
    Matrix* mat = nullptr;
    Vector* vec = nullptr;
    Matrix m_mat, v_mat;
    Vector m_vec, v_vec;
    std::optional<DamperState> damper;
  };

  Policy policy_;
  LrSchedule schedule_;
  HybridConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<Slot> slots_;
};

}  // namespace sage
