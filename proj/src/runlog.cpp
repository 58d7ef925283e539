#include "sage/runlog.hpp"

#include <fstream>
#include <sstream>

#include "sage/error.hpp"
#include "sage/textio.hpp"

namespace sage {

std::string to_string(RecordStatus status) {
  switch (status) {
    case RecordStatus::Ok: return "ok";
    case RecordStatus::Completed: return "completed";
    case RecordStatus::Diverged: return "diverged";
  }
  throw UsageError("unknown record status");
}

RecordStatus record_status_from_string(std::string_view name) {
  if (name == "ok") return RecordStatus::Ok;
  if (name == "completed") return RecordStatus::Completed;
  if (name == "diverged") return RecordStatus::Diverged;
  throw ConfigError("unknown record status: " + std::string(name));
}

RecordStatus RunLog::terminal_status() const {
  if (records.empty()) {
    throw UsageError("run log has no records");
  }
  return records.back().status;
}

double RunLog::final_loss() const {
  if (records.empty()) {
    throw UsageError("run log has no records");
  }
  return records.back().loss;
}

std::string serialize(const RunLog& log) {
  std::string out;
  out += "sagelog " + std::to_string(log.version) + "\n";
  out += "policy " + log.policy + "\n";
  out += "seed " + std::to_string(log.seed) + "\n";
  out += "lr " + format_double(log.lr) + "\n";
  out += "config_hash " + hex64(log.config_hash) + "\n";
  out += "vocab " + std::to_string(log.vocab) + "\n";
  out += "dim " + std::to_string(log.dim) + "\n";
  out += "batch " + std::to_string(log.batch) + "\n";
  out += "steps " + std::to_string(log.steps) + "\n";
  out += "snapshot_every " + std::to_string(log.snapshot_every) + "\n";
  out += "zipf_exponent " + format_double(log.zipf_exponent) + "\n";
  out += "warmup_fraction " + format_double(log.warmup_fraction) + "\n";
  out += "columns step loss eta update_inf_norm status\n";

  std::size_t snap = 0;
  for (const RunRecord& rec : log.records) {
    out += "step " + std::to_string(rec.step) + " " + format_double(rec.loss) + " " +
           format_double(rec.eta) + " " + format_double(rec.update_inf_norm) + " " +
           to_string(rec.status) + "\n";
    while (snap < log.snapshots.size() && log.snapshots[snap].step <= rec.step) {
      const HSnapshot& s = log.snapshots[snap];
      out += "H " + std::to_string(s.step);
      for (std::size_t j = 0; j < s.h.size(); ++j) {
        out += " " + format_double(s.h[j]);
      }
      out += "\n";
      ++snap;
    }
  }
  return out;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

[[noreturn]] void bad_line(std::size_t lineno, const std::string& why) {
  throw ConfigError("run log line " + std::to_string(lineno) + ": " + why);
}

}  // namespace

RunLog parse_runlog(std::string_view text) {
  RunLog log;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  bool saw_version = false;
  bool saw_columns = false;

  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (line.empty()) {
      if (pos > text.size()) break;
      continue;
    }
    auto tokens = split_ws(line);
    const std::string key(tokens[0]);

    if (!saw_version) {
      if (key != "sagelog" || tokens.size() != 2) bad_line(lineno, "expected 'sagelog <version>'");
      const std::int64_t version = parse_int(tokens[1], "version");
      if (version != 1) {
        throw ConfigError("unsupported run log version " + std::to_string(version));
      }
      log.version = 1;
      saw_version = true;
      continue;
    }

    if (!saw_columns) {
      if (tokens.size() < 2) bad_line(lineno, "expected 'key value'");
      if (key == "columns") {
        if (line != "columns step loss eta update_inf_norm status") {
          bad_line(lineno, "unexpected column layout");
        }
        saw_columns = true;
      } else if (key == "policy") {
        log.policy = std::string(tokens[1]);
      } else if (key == "seed") {
        log.seed = parse_uint(tokens[1], "seed");
      } else if (key == "lr") {
        log.lr = parse_double(tokens[1], "lr");
      } else if (key == "config_hash") {
        std::uint64_t value = 0;
        for (char c : tokens[1]) {
          value <<= 4;
          if (c >= '0' && c <= '9') value |= static_cast<std::uint64_t>(c - '0');
          else if (c >= 'a' && c <= 'f') value |= static_cast<std::uint64_t>(c - 'a' + 10);
          else bad_line(lineno, "config_hash is not hex");
        }
        log.config_hash = value;
      } else if (key == "vocab") {
        log.vocab = parse_int(tokens[1], "vocab");
      } else if (key == "dim") {
        log.dim = parse_int(tokens[1], "dim");
      } else if (key == "batch") {
        log.batch = parse_int(tokens[1], "batch");
      } else if (key == "steps") {
        log.steps = parse_int(tokens[1], "steps");
      } else if (key == "snapshot_every") {
        log.snapshot_every = parse_int(tokens[1], "snapshot_every");
      } else if (key == "zipf_exponent") {
        log.zipf_exponent = parse_double(tokens[1], "zipf_exponent");
      } else if (key == "warmup_fraction") {
        log.warmup_fraction = parse_double(tokens[1], "warmup_fraction");
      } else {
        bad_line(lineno, "unknown header key '" + key + "'");
      }
      continue;
    }

    if (key == "step") {
      if (tokens.size() != 6) bad_line(lineno, "step record needs 5 fields");
      RunRecord rec;
      rec.step = parse_int(tokens[1], "step");
      rec.loss = parse_double(tokens[2], "loss");
      rec.eta = parse_double(tokens[3], "eta");
      rec.update_inf_norm = parse_double(tokens[4], "update_inf_norm");
      rec.status = record_status_from_string(tokens[5]);
      if (!log.records.empty() && rec.step <= log.records.back().step) {
        bad_line(lineno, "step numbers must increase");
      }
      log.records.push_back(rec);
    } else if (key == "H") {
      if (tokens.size() < 3) bad_line(lineno, "H snapshot needs a step and values");
      HSnapshot snap;
      snap.step = parse_int(tokens[1], "H step");
      snap.h = Vector(tokens.size() - 2);
      for (std::size_t i = 2; i < tokens.size(); ++i) {
        snap.h[i - 2] = parse_double(tokens[i], "H value");
      }
      log.snapshots.push_back(std::move(snap));
    } else {
      bad_line(lineno, "unknown record kind '" + key + "'");
    }
  }

  if (!saw_version) throw ConfigError("run log is empty");
  if (!saw_columns) throw ConfigError("run log has no columns line");
  if (log.records.empty()) throw ConfigError("run log has no records");
  return log;
}

RunLog read_runlog_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open run log: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_runlog(buffer.str());
}

void write_runlog_file(const RunLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ConfigError("cannot write run log: " + path);
  }
  out << serialize(log);
  if (!out) {
    throw ConfigError("failed writing run log: " + path);
  }
}

}  // namespace sage
