// Command-line front end: run experiment grids, compare run logs, and export
// analysis tables.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sage/analysis.hpp"
#include "sage/config.hpp"
#include "sage/error.hpp"
#include "sage/experiment.hpp"
#include "sage/runlog.hpp"
#include "sage/textio.hpp"

namespace {

std::filesystem::path resolve_out_dir(const std::string& flag_value,
                                      const std::string& config_value) {
  if (!flag_value.empty()) return flag_value;
  if (!config_value.empty()) return config_value;
  if (const char* env = std::getenv("SAGE_OUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "runs";
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw sage::ConfigError("cannot write output file: " + out_path);
  }
  out << text;
}

std::vector<std::string> split_csv_flag(const std::string& value) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    std::size_t comma = value.find(',', pos);
    if (comma == std::string::npos) comma = value.size();
    out.push_back(value.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

int run_command(const std::string& config_path, const std::string& policy_flag,
                const std::string& seeds_flag, const std::string& lr_flag,
                std::int64_t snapshot_flag, const std::string& out_flag, int jobs) {
  sage::ExperimentConfig config = sage::ExperimentConfig::load(config_path);
  if (!policy_flag.empty()) {
    config.policies.clear();
    for (const std::string& name : split_csv_flag(policy_flag)) {
      config.policies.push_back(sage::policy_from_string(name));
    }
  }
  if (!seeds_flag.empty()) {
    config.seeds.clear();
    for (const std::string& item : split_csv_flag(seeds_flag)) {
      config.seeds.push_back(sage::parse_uint(item, "--seeds"));
    }
  }
  if (!lr_flag.empty()) {
    config.lrs.clear();
    for (const std::string& item : split_csv_flag(lr_flag)) {
      config.lrs.push_back(sage::parse_double(item, "--lr"));
    }
  }
  if (snapshot_flag >= 0) {
    config.snapshot_every = snapshot_flag;
  }
  config.validate();

  const std::filesystem::path out_dir = resolve_out_dir(out_flag, config.out_dir);
  const auto outcomes = sage::run_experiment(config, out_dir, jobs);
  for (const auto& outcome : outcomes) {
    std::cout << outcome.file.string() << " " << sage::to_string(outcome.terminal)
              << " final_loss=" << sage::format_double(outcome.final_loss) << "\n";
  }
  return 0;
}

int compare_command(const std::string& dir) {
  const auto rows = sage::compare_logs(dir);
  std::cout << sage::compare_table_csv(rows);
  return 0;
}

int export_command(const std::string& kind, const std::string& log_path,
                   const std::string& baseline_path, const std::string& out_path, int k,
                   const std::string& dims_name, double tokens_per_step,
                   double baseline_step_seconds, double step_seconds) {
  if (kind == "memory") {
    const sage::ModelDims dims = sage::ModelDims::preset(dims_name);
    write_output(sage::memory_csv(dims, sage::MemoryModel{}), out_path);
    return 0;
  }
  if (log_path.empty()) {
    throw sage::UsageError("export " + kind + ": --log is required");
  }
  const sage::RunLog log = sage::read_runlog_file(log_path);
  if (kind == "heatmap") {
    write_output(sage::heatmap_csv(log), out_path);
    return 0;
  }
  if (kind == "pca") {
    write_output(sage::pca_csv(log, k), out_path);
    return 0;
  }
  if (kind == "throughput") {
    if (baseline_path.empty()) {
      throw sage::UsageError("export throughput: --baseline is required");
    }
    const sage::RunLog baseline = sage::read_runlog_file(baseline_path);
    write_output(sage::throughput_csv(baseline, log, tokens_per_step,
                                      baseline_step_seconds, step_seconds),
                 out_path);
    return 0;
  }
  throw sage::UsageError("unknown export kind: " + kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SAGE optimizer experiment harness"};
  app.require_subcommand(1);

  // run
  std::string run_config;
  std::string run_policy;
  std::string run_seeds;
  std::string run_lrs;
  std::int64_t run_snapshot = -1;
  std::string run_out;
  int run_jobs = 0;
  CLI::App* run = app.add_subcommand("run", "train a grid of (policy, lr, seed) cells");
  run->add_option("--config", run_config, "experiment config file")->required();
  run->add_option("--policy", run_policy, "override policy list (comma separated)");
  run->add_option("--seeds", run_seeds, "override seed list (comma separated)");
  run->add_option("--lr", run_lrs, "override learning-rate list (comma separated)");
  run->add_option("--snapshot-every", run_snapshot, "override snapshot cadence (steps)");
  run->add_option("--out", run_out, "output directory for run logs");
  run->add_option("--jobs", run_jobs, "worker threads (0 = hardware)");

  // compare
  std::string compare_dir;
  CLI::App* compare = app.add_subcommand("compare", "summarize run logs in a directory");
  compare->add_option("dir", compare_dir, "directory of .log files")->required();

  // export
  std::string export_kind;
  std::string export_log;
  std::string export_baseline;
  std::string export_out;
  int export_k = 3;
  std::string export_dims = "270m";
  double export_tokens_per_step = 1.0;
  double export_base_step_seconds = 1.0;
  double export_step_seconds = 1.0;
  CLI::App* exp = app.add_subcommand("export", "emit analysis tables from run logs");
  exp->add_option("--kind", export_kind, "heatmap|pca|memory|throughput")->required();
  exp->add_option("--log", export_log, "run log file");
  exp->add_option("--baseline", export_baseline, "baseline run log (throughput)");
  exp->add_option("--out", export_out, "output file (default stdout)");
  exp->add_option("--k", export_k, "number of principal components");
  exp->add_option("--dims", export_dims, "model preset for memory export (270m|0.6b|1.3b)");
  exp->add_option("--tokens-per-step", export_tokens_per_step, "tokens per training step");
  exp->add_option("--baseline-step-seconds", export_base_step_seconds,
                  "wall-clock seconds per baseline step");
  exp->add_option("--step-seconds", export_step_seconds,
                  "wall-clock seconds per contender step");

  try {
    app.parse(argc, argv);
    if (run->parsed()) {
      return run_command(run_config, run_policy, run_seeds, run_lrs, run_snapshot, run_out,
                         run_jobs);
    }
    if (compare->parsed()) {
      return compare_command(compare_dir);
    }
    return export_command(export_kind, export_log, export_baseline, export_out, export_k,
                          export_dims, export_tokens_per_step, export_base_step_seconds,
                          export_step_seconds);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help
    }
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sage::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
