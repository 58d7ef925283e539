#include "sage/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include "sage/textio.hpp"
#include "sage/toymodel.hpp"

namespace sage {

TrainSetup make_setup(const ExperimentConfig& config, Policy policy, double lr,
                      std::uint64_t seed) {
  TrainSetup setup;
  setup.policy = policy;
  setup.dims = config.dims;
  setup.zipf_exponent = config.zipf_exponent;
  setup.schedule = {lr, config.steps, config.warmup_fraction, config.eta_min};
  setup.steps = config.steps;
  setup.seed = seed;
  setup.snapshot_every = config.snapshot_every;
  setup.hybrid.optimizer = config.optimizer;
  setup.hybrid.sinkgd = config.sinkgd;
  setup.hybrid.one_d_adamw = config.one_d_adamw;
  setup.config_hash = config.hash();
  return setup;
}

std::string run_file_name(const std::string& policy, double lr, std::uint64_t seed) {
  return policy + "_lr" + format_double(lr) + "_seed" + std::to_string(seed) + ".log";
}

std::vector<RunOutcome> run_experiment(const ExperimentConfig& config,
                                       const std::filesystem::path& out_dir,
                                       int jobs) {
  config.validate();
  std::filesystem::create_directories(out_dir);

  struct Cell {
    Policy policy;
    double lr;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (Policy policy : config.policies) {
    for (double lr : config.lrs) {
      for (std::uint64_t seed : config.seeds) {
        cells.push_back({policy, lr, seed});
      }
    }
  }

  std::vector<RunOutcome> outcomes(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    while (true) {
      const std::size_t index = next.fetch_add(1);
      if (index >= cells.size()) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;
      }
      try {
        const Cell& cell = cells[index];
        const TrainSetup setup = make_setup(config, cell.policy, cell.lr, cell.seed);
        const RunLog log = train_run(setup);
        const std::filesystem::path file =
            out_dir / run_file_name(to_string(cell.policy), cell.lr, cell.seed);
        write_runlog_file(log, file.string());
        outcomes[index] = {file, to_string(cell.policy), cell.lr, cell.seed,
                           log.terminal_status(), log.final_loss()};
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  int thread_count = jobs;
  if (thread_count <= 0) {
    thread_count = static_cast<int>(std::thread::hardware_concurrency());
    if (thread_count <= 0) thread_count = 1;
  }
  thread_count = std::min<int>(thread_count, static_cast<int>(cells.size()));

  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int i = 0; i < thread_count; ++i) {
      pool.emplace_back(worker);
    }
    for (std::thread& t : pool) {
      t.join();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return outcomes;
}

std::vector<CompareRow> compare_logs(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw UsageError("compare: not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".log") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    throw UsageError("compare: no .log files in " + dir.string());
  }
  std::sort(files.begin(), files.end());

  struct Agg {
    int seeds = 0;
    int completed = 0;
    int diverged = 0;
    double loss_sum = 0.0;
  };
  std::map<std::pair<std::string, double>, Agg> groups;
  for (const auto& file : files) {
    const RunLog log = read_runlog_file(file.string());
    Agg& agg = groups[{log.policy, log.lr}];
    agg.seeds += 1;
    if (log.terminal_status() == RecordStatus::Diverged) {
      agg.diverged += 1;
    } else {
      agg.completed += 1;
      agg.loss_sum += log.final_loss();
    }
  }

  std::vector<CompareRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, agg] : groups) {
    CompareRow row;
    row.policy = key.first;
    row.lr = key.second;
    row.seeds = agg.seeds;
    row.completed = agg.completed;
    row.diverged = agg.diverged;
    row.mean_final_loss =
        agg.completed > 0 ? agg.loss_sum / agg.completed : std::nan("");
    rows.push_back(row);
  }

  // Flag the best learning rate per policy; map order already favors the
  // lower lr on exact ties.
  std::map<std::string, std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].completed == 0) continue;
    auto it = best.find(rows[i].policy);
    if (it == best.end() || rows[i].mean_final_loss < rows[it->second].mean_final_loss) {
      best[rows[i].policy] = i;
    }
  }
  for (const auto& [policy, index] : best) {
    rows[index].best = true;
  }
  return rows;
}

std::string compare_table_csv(const std::vector<CompareRow>& rows) {
  std::string out = "policy,lr,seeds,completed,diverged,mean_final_loss,best\n";
  for (const CompareRow& row : rows) {
    out += row.policy + "," + format_double(row.lr) + "," + std::to_string(row.seeds) + "," +
           std::to_string(row.completed) + "," + std::to_string(row.diverged) + "," +
           format_double(row.mean_final_loss) + "," + (row.best ? "1" : "0") + "\n";
  }
  return out;
}

std::string heatmap_csv(const RunLog& log) {
  if (log.snapshots.empty()) {
    throw UsageError("heatmap export: run log has no adaptive-scale snapshots");
  }
  const Trajectory traj = trajectory_from_log(log);
  std::string out = "step,dim,value\n";
  for (const HeatmapCell& cell : export_heatmap(traj)) {
    out += std::to_string(cell.step) + "," + std::to_string(cell.dim) + "," +
           format_double(cell.value) + "\n";
  }
  return out;
}

std::string pca_csv(const RunLog& log, int k) {
  if (log.snapshots.empty()) {
    throw UsageError("pca export: run log has no adaptive-scale snapshots");
  }
  const Trajectory traj = trajectory_from_log(log);
  const PcaResult pca = pca_topk(traj, k);
  std::string out = "quantity,component,position,value\n";
  for (std::size_t c = 0; c < pca.components.size(); ++c) {
    for (std::size_t j = 0; j < pca.components[c].size(); ++j) {
      out += "component," + std::to_string(c + 1) + "," + std::to_string(j) + "," +
             format_double(pca.components[c][j]) + "\n";
    }
  }
  for (std::size_t c = 0; c < pca.explained.size(); ++c) {
    out += "explained_variance_fraction," + std::to_string(c + 1) + ",0," +
           format_double(pca.explained[c]) + "\n";
  }
  for (std::size_t c = 0; c < pca.components.size(); ++c) {
    for (std::size_t t = 0; t < pca.projections.rows(); ++t) {
      out += "projection," + std::to_string(c + 1) + "," + std::to_string(traj.steps[t]) +
             "," + format_double(pca.projections(t, c)) + "\n";
    }
  }
  return out;
}

std::string memory_csv(const ModelDims& dims, const MemoryModel& mem) {
  std::string out = "policy,state_bytes,state_gib\n";
  for (Policy policy : supported_policies()) {
    const std::int64_t bytes = count_state_bytes(policy, dims, mem);
    out += to_string(policy) + "," + std::to_string(bytes) + "," +
           format_double(bytes_to_gib(bytes)) + "\n";
  }
  return out;
}

std::string throughput_csv(const RunLog& baseline, const RunLog& contender,
                           double tokens_per_step, double baseline_step_seconds,
                           double contender_step_seconds) {
  if (!(baseline_step_seconds > 0.0)) {
    throw UsageError("throughput export: baseline step seconds must be positive");
  }
  const ThroughputInput contender_input =
      throughput_from_logs(baseline, contender, tokens_per_step, contender_step_seconds);
  const double base_steps = static_cast<double>(baseline.records.back().step);

  std::string out = "quantity,value\n";
  out += "base_tokens," + format_double(contender_input.base_tokens) + "\n";
  out += "target_loss," + format_double(baseline.final_loss()) + "\n";
  const double base_seconds = baseline_step_seconds * base_steps;
  out += "baseline_seconds," + format_double(base_seconds) + "\n";
  const auto base_eff =
      effective_throughput({contender_input.base_tokens, base_seconds});
  out += "baseline_t_eff," + format_double(*base_eff) + "\n";
  const auto contender_eff = effective_throughput(contender_input);
  out += std::string("contender_reached,") + (contender_eff ? "true" : "false") + "\n";
  if (contender_eff) {
    out += "contender_seconds," + format_double(*contender_input.seconds_to_target) + "\n";
    out += "contender_t_eff," + format_double(*contender_eff) + "\n";
  }
  return out;
}

}  // namespace sage
