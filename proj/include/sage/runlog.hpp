#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sage/matrix.hpp"

namespace sage {

enum class RecordStatus { Ok, Completed, Diverged };

std::string to_string(RecordStatus status);
RecordStatus record_status_from_string(std::string_view name);

/// One training-step observation. Step 0 holds the initial loss before any
/// update; its eta and update norm are zero.
struct RunRecord {
  std::int64_t step = 0;
  double loss = 0.0;
  double eta = 0.0;
  double update_inf_norm = 0.0;
  RecordStatus status = RecordStatus::Ok;
};

struct HSnapshot {
  std::int64_t step = 0;
  Vector h;
};

/// Full record of one training run: header metadata, per-step records in
/// increasing step order, and optional adaptive-scale snapshots.
struct RunLog {
  int version = 1;
  std::string policy;
  std::uint64_t seed = 0;
  double lr = 0.0;
  std::uint64_t config_hash = 0;
  std::int64_t vocab = 0;
  std::int64_t dim = 0;
  std::int64_t batch = 0;
  std::int64_t steps = 0;
  std::int64_t snapshot_every = 0;
  double zipf_exponent = 1.0;
  double warmup_fraction = 0.1;

  std::vector<RunRecord> records;
  std::vector<HSnapshot> snapshots;

  RecordStatus terminal_status() const;
  double final_loss() const;  // loss of the last record
};

/// Line-oriented text form: a version line, `key value` headers, a fixed
/// `columns` line, then one `step ...` line per record and `H ...` lines for
/// snapshots. Serialization is byte-deterministic.
std::string serialize(const RunLog& log);

/// Parses the text form; rejects unknown versions, unknown header keys, and
/// malformed lines with a ConfigError naming the line.
RunLog parse_runlog(std::string_view text);

RunLog read_runlog_file(const std::string& path);
void write_runlog_file(const RunLog& log, const std::string& path);

}  // namespace sage
