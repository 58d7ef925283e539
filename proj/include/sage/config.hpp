#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sage/optimizers.hpp"
#include "sage/toymodel.hpp"

namespace sage {

/// Experiment description parsed from the sectioned key = value config text.
/// Every key has a default; unknown sections or keys are rejected with the
/// offending line number.
struct ExperimentConfig {
  // [run]
  std::vector<Policy> policies = {Policy::SageHybrid};
  std::int64_t steps = 2000;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::vector<double> lrs = {1e-3};
  std::int64_t snapshot_every = 0;
  std::string out_dir;  // empty: resolve via --out, SAGE_OUT_DIR, then "runs"

  // [model]
  ToyDims dims;
  double zipf_exponent = 1.0;

  // [schedule]
  double warmup_fraction = 0.1;
  double eta_min = 0.0;

  // [optimizer] + [sinkgd]
  SageConfig optimizer;
  SinkGDConfig sinkgd;
  bool one_d_adamw = false;

  void validate() const;

  /// Canonical text form: fixed section and key order, shortest number forms.
  std::string canonical() const;
  std::uint64_t hash() const;

  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

bool operator==(const ToyDims& a, const ToyDims& b);

}  // namespace sage
