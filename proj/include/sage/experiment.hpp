#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sage/analysis.hpp"
#include "sage/config.hpp"
#include "sage/runlog.hpp"

namespace sage {

struct RunOutcome {
  std::filesystem::path file;
  std::string policy;
  double lr = 0.0;
  std::uint64_t seed = 0;
  RecordStatus terminal = RecordStatus::Completed;
  double final_loss = 0.0;
};

/// Runs every (policy x lr x seed) cell of the experiment and writes one run
/// log per cell under out_dir. Divergence is recorded, not raised. Cells run
/// on `jobs` worker threads (0 picks the hardware count); outputs do not
/// depend on scheduling.
std::vector<RunOutcome> run_experiment(const ExperimentConfig& config,
                                       const std::filesystem::path& out_dir,
                                       int jobs = 0);

/// Builds the per-cell training setup (shared by run_experiment and tests).
TrainSetup make_setup(const ExperimentConfig& config, Policy policy, double lr,
                      std::uint64_t seed);

std::string run_file_name(const std::string& policy, double lr, std::uint64_t seed);

struct CompareRow {
  std::string policy;
  double lr = 0.0;
  int seeds = 0;
  int completed = 0;
  int diverged = 0;
  double mean_final_loss = 0.0;  // over completed runs; NaN if none completed
  bool best = false;             // lowest mean for this policy
};

/// Aggregates every run log in a directory into per-(policy, lr) rows.
std::vector<CompareRow> compare_logs(const std::filesystem::path& dir);
std::string compare_table_csv(const std::vector<CompareRow>& rows);

std::string heatmap_csv(const RunLog& log);
std::string pca_csv(const RunLog& log, int k);
std::string memory_csv(const ModelDims& dims, const MemoryModel& mem);
std::string throughput_csv(const RunLog& baseline, const RunLog& contender,
                           double tokens_per_step, double baseline_step_seconds,
                           double contender_step_seconds);

}  // namespace sage
