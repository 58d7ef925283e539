#include "sage/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "sage/textio.hpp"

namespace sage {

bool operator==(const ToyDims& a, const ToyDims& b) {
  return a.vocab == b.vocab && a.dim == b.dim && a.batch == b.batch;
}

void ExperimentConfig::validate() const {
  if (policies.empty()) throw ConfigError("run.policy: at least one policy required");
  for (Policy p : policies) {
    if (p == Policy::Apollo) {
      throw UnsupportedPolicyError("run.policy: apollo is not supported");
    }
  }
  if (steps < 0) throw ConfigError("run.steps must be >= 0");
  if (seeds.empty()) throw ConfigError("run.seeds: at least one seed required");
  if (lrs.empty()) throw ConfigError("run.lrs: at least one learning rate required");
  for (double lr : lrs) {
    if (!(lr > 0.0)) throw ConfigError("run.lrs: learning rates must be positive");
  }
  if (snapshot_every < 0) throw ConfigError("run.snapshot_every must be >= 0");
  if (dims.vocab < 1) throw ConfigError("model.vocab must be >= 1");
  if (dims.dim < 1) throw ConfigError("model.dim must be >= 1");
  if (dims.batch < 1) throw ConfigError("model.batch must be >= 1");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    throw ConfigError("schedule.warmup_fraction must be in [0,1)");
  }
  if (!(eta_min >= 0.0)) throw ConfigError("schedule.eta_min must be >= 0");
  optimizer.validate();
  sinkgd.validate();
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  out += "[run]\n";
  out += "policy = ";
  for (std::size_t i = 0; i < policies.size(); ++i) {
    if (i) out += ",";
    out += to_string(policies[i]);
  }
  out += "\n";
  out += "steps = " + std::to_string(steps) + "\n";
  out += "seeds = ";
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(seeds[i]);
  }
  out += "\n";
  out += "lrs = ";
  for (std::size_t i = 0; i < lrs.size(); ++i) {
    if (i) out += ",";
    out += format_double(lrs[i]);
  }
  out += "\n";
  out += "snapshot_every = " + std::to_string(snapshot_every) + "\n";
  out += "out_dir = " + out_dir + "\n";
  out += "\n[model]\n";
  out += "vocab = " + std::to_string(dims.vocab) + "\n";
  out += "dim = " + std::to_string(dims.dim) + "\n";
  out += "batch = " + std::to_string(dims.batch) + "\n";
  out += "zipf_exponent = " + format_double(zipf_exponent) + "\n";
  out += "\n[schedule]\n";
  out += "warmup_fraction = " + format_double(warmup_fraction) + "\n";
  out += "eta_min = " + format_double(eta_min) + "\n";
  out += "\n[optimizer]\n";
  out += "beta1 = " + format_double(optimizer.beta1) + "\n";
  out += "beta2 = " + format_double(optimizer.beta2) + "\n";
  out += "weight_decay = " + format_double(optimizer.weight_decay) + "\n";
  out += "epsilon = " + format_double(optimizer.epsilon) + "\n";
  out += "damping = " + std::string(optimizer.damping ? "true" : "false") + "\n";
  out += "instant_damper = " +
         std::string(optimizer.instant_per_element ? "element" : "dimension") + "\n";
  out += "one_d_adamw = " + std::string(one_d_adamw ? "true" : "false") + "\n";
  out += "\n[sinkgd]\n";
  out += "alpha = " + format_double(sinkgd.alpha) + "\n";
  out += "iterations = " + std::to_string(sinkgd.iterations) + "\n";
  out += "epsilon = " + format_double(sinkgd.epsilon) + "\n";
  out += "weight_decay = " + format_double(sinkgd.weight_decay) + "\n";
  return out;
}

std::uint64_t ExperimentConfig::hash() const {
  return fnv1a(canonical());
}

namespace {

std::string_view trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && (text[begin] == ' ' || text[begin] == '\t')) ++begin;
  while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\t' || text[end - 1] == '\r')) {
    --end;
  }
  return text.substr(begin, end - begin);
}

std::vector<std::string> split_list(std::string_view text, const std::string& context) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const std::string_view item = trim(text.substr(pos, comma - pos));
    if (item.empty()) {
      throw ConfigError(context + ": empty list entry");
    }
    out.emplace_back(item);
    pos = comma + 1;
  }
  return out;
}

[[noreturn]] void bad(std::size_t lineno, const std::string& why) {
  throw ConfigError("config line " + std::to_string(lineno) + ": " + why);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig cfg;
  std::string section;
  std::set<std::string> seen;
  std::size_t lineno = 0;
  std::size_t pos = 0;

  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    const bool last = end == text.size();
    pos = end + 1;
    ++lineno;

    std::string_view line = raw;
    if (std::size_t hash_pos = line.find('#'); hash_pos != std::string_view::npos) {
      line = line.substr(0, hash_pos);
    }
    line = trim(line);
    if (line.empty()) {
      if (last) break;
      continue;
    }

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) bad(lineno, "malformed section header");
      section = std::string(line.substr(1, line.size() - 2));
      if (section != "run" && section != "model" && section != "schedule" &&
          section != "optimizer" && section != "sinkgd") {
        bad(lineno, "unknown section '" + section + "'");
      }
      if (last) break;
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) bad(lineno, "expected 'key = value'");
    const std::string key = std::string(trim(line.substr(0, eq)));
    const std::string value = std::string(trim(line.substr(eq + 1)));
    if (key.empty()) bad(lineno, "empty key");
    if (section.empty()) bad(lineno, "key '" + key + "' outside any section");
    const std::string qualified = section + "." + key;
    if (!seen.insert(qualified).second) bad(lineno, "duplicate key '" + qualified + "'");

    try {
      if (section == "run") {
        if (key == "policy") {
          cfg.policies.clear();
          for (const std::string& name : split_list(value, qualified)) {
            cfg.policies.push_back(policy_from_string(name));
          }
        } else if (key == "steps") {
          cfg.steps = parse_int(value, qualified);
        } else if (key == "seeds") {
          cfg.seeds.clear();
          for (const std::string& item : split_list(value, qualified)) {
            cfg.seeds.push_back(parse_uint(item, qualified));
          }
        } else if (key == "lrs") {
          cfg.lrs.clear();
          for (const std::string& item : split_list(value, qualified)) {
            cfg.lrs.push_back(parse_double(item, qualified));
          }
        } else if (key == "snapshot_every") {
          cfg.snapshot_every = parse_int(value, qualified);
        } else if (key == "out_dir") {
          cfg.out_dir = value;
        } else {
          bad(lineno, "unknown key '" + qualified + "'");
        }
      } else if (section == "model") {
        if (key == "vocab") cfg.dims.vocab = parse_int(value, qualified);
        else if (key == "dim") cfg.dims.dim = parse_int(value, qualified);
        else if (key == "batch") cfg.dims.batch = parse_int(value, qualified);
        else if (key == "zipf_exponent") cfg.zipf_exponent = parse_double(value, qualified);
        else bad(lineno, "unknown key '" + qualified + "'");
      } else if (section == "schedule") {
        if (key == "warmup_fraction") cfg.warmup_fraction = parse_double(value, qualified);
        else if (key == "eta_min") cfg.eta_min = parse_double(value, qualified);
        else bad(lineno, "unknown key '" + qualified + "'");
      } else if (section == "optimizer") {
        if (key == "beta1") cfg.optimizer.beta1 = parse_double(value, qualified);
        else if (key == "beta2") cfg.optimizer.beta2 = parse_double(value, qualified);
        else if (key == "weight_decay") cfg.optimizer.weight_decay = parse_double(value, qualified);
        else if (key == "epsilon") cfg.optimizer.epsilon = parse_double(value, qualified);
        else if (key == "damping") cfg.optimizer.damping = parse_bool(value, qualified);
        else if (key == "instant_damper") {
          if (value == "dimension") cfg.optimizer.instant_per_element = false;
          else if (value == "element") cfg.optimizer.instant_per_element = true;
          else bad(lineno, qualified + ": expected 'dimension' or 'element'");
        } else if (key == "one_d_adamw") {
          cfg.one_d_adamw = parse_bool(value, qualified);
        } else {
          bad(lineno, "unknown key '" + qualified + "'");
        }
      } else {  // sinkgd
        if (key == "alpha") cfg.sinkgd.alpha = parse_double(value, qualified);
        else if (key == "iterations") {
          cfg.sinkgd.iterations = static_cast<int>(parse_int(value, qualified));
        } else if (key == "epsilon") cfg.sinkgd.epsilon = parse_double(value, qualified);
        else if (key == "weight_decay") cfg.sinkgd.weight_decay = parse_double(value, qualified);
        else bad(lineno, "unknown key '" + qualified + "'");
      }
    } catch (const ConfigError& err) {
      // Attach the line number to value-level parse failures.
      const std::string what = err.what();
      if (what.rfind("config line", 0) == 0) throw;
      bad(lineno, what);
    }

    if (last) break;
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

}  // namespace sage
