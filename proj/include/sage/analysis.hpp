#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sage/matrix.hpp"
#include "sage/optimizers.hpp"
#include "sage/runlog.hpp"

namespace sage {

/// Decoder-only transformer dimensions sufficient for parameter counting.
/// The embedding is tied (lookup and output head share one vocab x hidden
/// matrix) and attention uses grouped key/value heads.
struct ModelDims {
  std::int64_t vocab = 0;
  std::int64_t hidden = 0;
  std::int64_t intermediate = 0;
  std::int64_t layers = 0;
  std::int64_t heads = 0;
  std::int64_t kv_heads = 0;

  void validate() const;

  std::int64_t head_dim() const { return hidden / heads; }
  std::int64_t kv_dim() const { return kv_heads * head_dim(); }
  std::int64_t embedding_params() const { return vocab * hidden; }
  /// 2 * q/o projections + 2 * k/v projections + gate/up/down MLP + 2 norms
  /// per layer, plus the tied embedding and the final norm.
  std::int64_t total_params() const;
  /// All 1D tensors: two norms per layer plus the final norm.
  std::int64_t one_d_elements() const;
  /// Sum of column counts (input features) over all non-embedding 2D tensors.
  std::int64_t dense_2d_cols() const;

  /// Named presets: "270m", "0.6b", "1.3b".
  static ModelDims preset(const std::string& name);
  static std::vector<std::string> preset_names();
};

/// Optimizer state is stored in 32-bit precision by default.
struct MemoryModel {
  std::int64_t bytes_per_state_element = 4;
};

/// Closed-form optimizer-state element count for a policy.
std::int64_t count_state_elements(Policy policy, const ModelDims& dims);

/// count_state_elements scaled to bytes.
std::int64_t count_state_bytes(Policy policy, const ModelDims& dims, const MemoryModel& mem);

double bytes_to_gib(std::int64_t bytes);

/// Ordered sequence of adaptive-scale snapshots from one run.
struct Trajectory {
  std::vector<std::int64_t> steps;
  std::vector<Vector> snapshots;

  std::size_t dim() const;
  void validate() const;  // uniform length, entries in [0,1]
};

Trajectory trajectory_from_log(const RunLog& log);

struct PcaResult {
  std::vector<Vector> components;        // k orthonormal vectors of length d
  std::vector<double> explained;         // eigenvalue fractions, non-increasing
  Matrix projections;                    // T x k, centered data onto components
  std::vector<double> eigenvalues;       // absolute eigenvalues, same order
};

/// PCA of the snapshot sequence via deterministic deflated power iteration on
/// the sample covariance (divisor T-1). Component signs are canonicalized so
/// the entry of largest magnitude is positive.
PcaResult pca_topk(const Trajectory& traj, int k);

struct HeatmapCell {
  std::int64_t step = 0;
  std::int64_t dim = 0;
  double value = 0.0;  // log10, min-max rescaled to [0,1]
};

/// Snapshot values floored at 1e-12, log10-transformed, and min-max rescaled
/// over the whole run. A degenerate run (all values equal) maps to 1.0.
std::vector<HeatmapCell> export_heatmap(const Trajectory& traj);

struct ThroughputInput {
  double base_tokens = 0.0;                  // N_base
  std::optional<double> seconds_to_target;   // T_O; empty if never reached
};

/// N_base / T_O in tokens per second; empty when the target was not reached.
std::optional<double> effective_throughput(const ThroughputInput& input);

/// Builds the throughput comparison from two logs: the baseline defines the
/// target (its final loss) and the token budget; the contender is timed to
/// the first step that matches the target.
ThroughputInput throughput_from_logs(const RunLog& baseline, const RunLog& contender,
                                     double tokens_per_step, double contender_step_seconds);

}  // namespace sage
