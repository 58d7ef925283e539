#include "sage/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace sage {

void ModelDims::validate() const {
  if (vocab < 1 || hidden < 1 || intermediate < 1 || layers < 1 || heads < 1 || kv_heads < 1) {
    throw ConfigError("ModelDims: all counts must be >= 1");
  }
  if (hidden % heads != 0) {
    throw ConfigError("ModelDims: hidden must be divisible by heads");
  }
}

std::int64_t ModelDims::total_params() const {
  validate();
  const std::int64_t attn = 2 * hidden * hidden + 2 * hidden * kv_dim();
  const std::int64_t mlp = 3 * hidden * intermediate;
  const std::int64_t norms = 2 * hidden;
  return embedding_params() + layers * (attn + mlp + norms) + hidden;
}

std::int64_t ModelDims::one_d_elements() const {
  return (2 * layers + 1) * hidden;
}

std::int64_t ModelDims::dense_2d_cols() const {
  // q/k/v/o and gate/up read hidden-sized inputs; down reads the intermediate.
  return layers * (6 * hidden + intermediate);
}

ModelDims ModelDims::preset(const std::string& name) {
  if (name == "270m") return {128256, 1024, 2816, 13, 16, 2};
  if (name == "0.6b") return {128256, 1536, 4224, 16, 24, 3};
  if (name == "1.3b") return {128256, 2048, 5632, 24, 32, 4};
  throw ConfigError("unknown model preset: " + name);
}

std::vector<std::string> ModelDims::preset_names() {
  return {"270m", "0.6b", "1.3b"};
}

std::int64_t count_state_elements(Policy policy, const ModelDims& dims) {
  dims.validate();
  const std::int64_t emb = dims.embedding_params();
  const std::int64_t one_d = dims.one_d_elements();
  switch (policy) {
    case Policy::AdamW:
      return 2 * dims.total_params();
    case Policy::Lion:
      return dims.total_params();
    case Policy::SagePure:
      // Momentum everywhere plus a per-column damper on each 2D tensor and a
      // per-element damper on each 1D tensor.
      return dims.total_params() + dims.hidden + dims.dense_2d_cols() + one_d;
    case Policy::SageHybrid:
      // Embedding momentum + its damper; 1D slots hold momentum + damper
      // (identical count with the AdamW-for-1D variant: m + v).
      return emb + dims.hidden + 2 * one_d;
    case Policy::LionHybrid:
      return emb + 2 * one_d;
    case Policy::SinkGDHybrid:
      return 2 * emb + 2 * one_d;
    case Policy::SinkGDPure:
      return 2 * one_d;
    case Policy::Apollo:
      break;
  }
  throw UnsupportedPolicyError("memory accounting: policy apollo is not supported");
}

std::int64_t count_state_bytes(Policy policy, const ModelDims& dims, const MemoryModel& mem) {
  if (mem.bytes_per_state_element < 1) {
    throw ConfigError("MemoryModel: bytes_per_state_element must be >= 1");
  }
  return count_state_elements(policy, dims) * mem.bytes_per_state_element;
}

double bytes_to_gib(std::int64_t bytes) {
  return static_cast<double>(bytes) / static_cast<double>(1LL << 30);
}

std::size_t Trajectory::dim() const {
  return snapshots.empty() ? 0 : snapshots.front().size();
}

void Trajectory::validate() const {
  if (steps.size() != snapshots.size()) {
    throw DimensionError("trajectory: step/snapshot count mismatch");
  }
  const std::size_t d = dim();
  for (const Vector& snap : snapshots) {
    if (snap.size() != d) {
      throw DimensionError("trajectory: snapshot lengths differ");
    }
    for (std::size_t j = 0; j < snap.size(); ++j) {
      if (!(snap[j] >= 0.0 && snap[j] <= 1.0)) {
        throw InvalidValueError("trajectory: snapshot entry outside [0,1]");
      }
    }
  }
}

Trajectory trajectory_from_log(const RunLog& log) {
  Trajectory traj;
  for (const HSnapshot& snap : log.snapshots) {
    traj.steps.push_back(snap.step);
    traj.snapshots.push_back(snap.h);
  }
  traj.validate();
  return traj;
}

namespace {

// Deterministic dominant eigenvector of a symmetric PSD matrix by power
// iteration, started from the basis vector of the largest diagonal entry and
// re-orthogonalized against already-extracted components.
struct EigenPair {
  double value = 0.0;
  Vector vector;
};

void orthogonalize(Vector& v, const std::vector<Vector>& basis) {
  for (const Vector& b : basis) {
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * b[i];
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * b[i];
  }
}

double norm2(const Vector& v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += v[i] * v[i];
  return std::sqrt(acc);
}

EigenPair dominant_eigenpair(const Matrix& a, const std::vector<Vector>& previous) {
  const std::size_t d = a.rows();
  std::size_t start = 0;
  double best_diag = -HUGE_VAL;
  for (std::size_t i = 0; i < d; ++i) {
    if (a(i, i) > best_diag) {
      best_diag = a(i, i);
      start = i;
    }
  }
  Vector v(d);
  v[start] = 1.0;
  orthogonalize(v, previous);
  double n = norm2(v);
  if (n < 1e-30) {
    // The preferred axis lies in the extracted span; fall back to the first
    // basis vector with a usable residual.
    for (std::size_t i = 0; i < d && n < 1e-30; ++i) {
      v = Vector(d);
      v[i] = 1.0;
      orthogonalize(v, previous);
      n = norm2(v);
    }
    if (n < 1e-30) throw UsageError("pca: no orthogonal direction left");
  }
  for (std::size_t i = 0; i < d; ++i) v[i] /= n;

  Vector next(d);
  for (int iter = 0; iter < 2000; ++iter) {
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += a(i, j) * v[j];
      next[i] = acc;
    }
    orthogonalize(next, previous);
    const double len = norm2(next);
    if (len < 1e-300) {
      // Null direction: eigenvalue 0, keep the current unit vector.
      break;
    }
    for (std::size_t i = 0; i < d; ++i) next[i] /= len;
    double diff_plus = 0.0;
    double diff_minus = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      diff_plus = std::max(diff_plus, std::abs(next[i] - v[i]));
      diff_minus = std::max(diff_minus, std::abs(next[i] + v[i]));
    }
    v = next;
    if (std::min(diff_plus, diff_minus) < 1e-15) break;
  }

  double value = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) acc += a(i, j) * v[j];
    value += v[i] * acc;
  }
  return {std::max(value, 0.0), v};
}

}  // namespace

PcaResult pca_topk(const Trajectory& traj, int k) {
  traj.validate();
  const std::size_t t_count = traj.snapshots.size();
  if (t_count < 2) {
    throw UsageError("pca: need at least 2 snapshots");
  }
  const std::size_t d = traj.dim();
  if (k < 1 || static_cast<std::size_t>(k) > d) {
    throw UsageError("pca: k must be in [1, dim]");
  }

  Matrix centered(t_count, d);
  Vector mean(d);
  for (const Vector& snap : traj.snapshots) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += snap[j];
  }
  for (std::size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    for (std::size_t j = 0; j < d; ++j) {
      centered(t, j) = traj.snapshots[t][j] - mean[j];
    }
  }

  Matrix cov(d, d);
  const double divisor = static_cast<double>(t_count - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < t_count; ++t) {
        acc += centered(t, i) * centered(t, j);
      }
      cov(i, j) = acc / divisor;
      cov(j, i) = cov(i, j);
    }
  }

  double total_variance = 0.0;
  for (std::size_t i = 0; i < d; ++i) total_variance += cov(i, i);

  PcaResult result;
  Matrix deflated = cov;
  for (int c = 0; c < k; ++c) {
    EigenPair pair = dominant_eigenpair(deflated, result.components);
    // Canonical sign: largest-magnitude entry positive.
    std::size_t arg = 0;
    for (std::size_t i = 1; i < d; ++i) {
      if (std::abs(pair.vector[i]) > std::abs(pair.vector[arg])) arg = i;
    }
    if (pair.vector[arg] < 0.0) {
      for (std::size_t i = 0; i < d; ++i) pair.vector[i] = -pair.vector[i];
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        deflated(i, j) -= pair.value * pair.vector[i] * pair.vector[j];
      }
    }
    result.eigenvalues.push_back(pair.value);
    result.components.push_back(std::move(pair.vector));
  }

  // Power iteration returns the dominant residual each round; enforce the
  // non-increasing order against rounding on near-equal eigenvalues.
  std::vector<std::size_t> order(result.eigenvalues.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.eigenvalues[a] > result.eigenvalues[b];
  });
  PcaResult sorted;
  for (std::size_t idx : order) {
    sorted.eigenvalues.push_back(result.eigenvalues[idx]);
    sorted.components.push_back(std::move(result.components[idx]));
  }
  result.eigenvalues = std::move(sorted.eigenvalues);
  result.components = std::move(sorted.components);

  for (double value : result.eigenvalues) {
    result.explained.push_back(total_variance > 0.0 ? value / total_variance : 0.0);
  }

  result.projections = Matrix(t_count, static_cast<std::size_t>(k));
  for (std::size_t t = 0; t < t_count; ++t) {
    for (int c = 0; c < k; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        acc += centered(t, j) * result.components[static_cast<std::size_t>(c)][j];
      }
      result.projections(t, static_cast<std::size_t>(c)) = acc;
    }
  }
  return result;
}

std::vector<HeatmapCell> export_heatmap(const Trajectory& traj) {
  traj.validate();
  if (traj.snapshots.empty()) {
    throw UsageError("heatmap: empty trajectory");
  }
  constexpr double kFloor = 1e-12;
  double lo = HUGE_VAL;
  double hi = -HUGE_VAL;
  for (const Vector& snap : traj.snapshots) {
    for (std::size_t j = 0; j < snap.size(); ++j) {
      const double v = std::log10(std::max(snap[j], kFloor));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const bool degenerate = !(hi > lo);
  std::vector<HeatmapCell> cells;
  cells.reserve(traj.snapshots.size() * traj.dim());
  for (std::size_t t = 0; t < traj.snapshots.size(); ++t) {
    const Vector& snap = traj.snapshots[t];
    for (std::size_t j = 0; j < snap.size(); ++j) {
      const double v = std::log10(std::max(snap[j], kFloor));
      const double scaled = degenerate ? 1.0 : (v - lo) / (hi - lo);
      cells.push_back({traj.steps[t], static_cast<std::int64_t>(j), scaled});
    }
  }
  return cells;
}

std::optional<double> effective_throughput(const ThroughputInput& input) {
  if (!(input.base_tokens > 0.0)) {
    throw UsageError("effective_throughput: base token count must be positive");
  }
  if (!input.seconds_to_target.has_value()) {
    return std::nullopt;
  }
  if (!(*input.seconds_to_target > 0.0)) {
    throw UsageError("effective_throughput: seconds must be positive");
  }
  return input.base_tokens / *input.seconds_to_target;
}

ThroughputInput throughput_from_logs(const RunLog& baseline, const RunLog& contender,
                                     double tokens_per_step, double contender_step_seconds) {
  if (!(tokens_per_step > 0.0) || !(contender_step_seconds > 0.0)) {
    throw UsageError("throughput_from_logs: rates must be positive");
  }
  if (baseline.terminal_status() != RecordStatus::Completed) {
    throw UsageError("throughput_from_logs: baseline run did not complete");
  }
  ThroughputInput input;
  input.base_tokens = tokens_per_step * static_cast<double>(baseline.records.back().step);
  const double target = baseline.final_loss();
  // Time the contender's training steps only; the step-0 record is the
  // untrained initial loss.
  for (const RunRecord& rec : contender.records) {
    if (rec.step < 1 || rec.status == RecordStatus::Diverged) continue;
    if (rec.loss <= target) {
      input.seconds_to_target = contender_step_seconds * static_cast<double>(rec.step);
      break;
    }
  }
  return input;
}

}  // namespace sage
