#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "orthant/errors.hpp"
#include "orthant/harness.hpp"

namespace {

// Option values as the command line carries them; vectors stay comma-joined
// strings until after the config file merge.
struct RawOptions {
  std::string scenario;
  std::string adversary = "uniform";
  std::string out;
  std::string format = "csv";
  long steps = 1000;
  unsigned long long seed = 1;
  double mesh = 0.1;
  double epsilon = 0.1;
  double eta = 0.0;
  long log_every = 0;
  long block_base = 100;
  std::string signal_a = "1,0";
  std::string signal_b = "0,1";
  std::string signal_c = "0.5,0.5";
  std::string config_path;
};

orthant::Vec parse_vector(const std::string& text, const std::string& field) {
  orthant::Vec out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    std::string token = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw orthant::PreconditionError(field + ": cannot parse number '" + token + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Flat key=value file; '#' starts a comment, blank lines are skipped.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw orthant::PreconditionError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string entry = trim(line);
    if (entry.empty()) continue;
    auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw orthant::PreconditionError("config file '" + path + "' line " + std::to_string(lineno) +
                                       ": expected key=value");
    }
    std::string key = trim(entry.substr(0, eq));
    std::string value = trim(entry.substr(eq + 1));
    if (key.empty()) {
      throw orthant::PreconditionError("config file '" + path + "' line " + std::to_string(lineno) +
                                       ": empty key");
    }
    out[key] = value;
  }
  return out;
}

long parse_long(const std::string& value, const std::string& key) {
  try {
    std::size_t used = 0;
    long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw orthant::PreconditionError("config key '" + key + "': cannot parse integer '" + value + "'");
  }
}

unsigned long long parse_u64(const std::string& value, const std::string& key) {
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw orthant::PreconditionError("config key '" + key + "': cannot parse integer '" + value + "'");
  }
}

double parse_double(const std::string& value, const std::string& key) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw orthant::PreconditionError("config key '" + key + "': cannot parse number '" + value + "'");
  }
}

// Applies file values to every option the command line left untouched.
void merge_config(const std::map<std::string, std::string>& file, const CLI::App& cmd,
                  RawOptions& raw) {
  const std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters = {
      {"scenario", [&](const std::string& v, const std::string&) { raw.scenario = v; }},
      {"adversary", [&](const std::string& v, const std::string&) { raw.adversary = v; }},
      {"out", [&](const std::string& v, const std::string&) { raw.out = v; }},
      {"format", [&](const std::string& v, const std::string&) { raw.format = v; }},
      {"steps", [&](const std::string& v, const std::string& k) { raw.steps = parse_long(v, k); }},
      {"seed", [&](const std::string& v, const std::string& k) { raw.seed = parse_u64(v, k); }},
      {"mesh", [&](const std::string& v, const std::string& k) { raw.mesh = parse_double(v, k); }},
      {"epsilon", [&](const std::string& v, const std::string& k) { raw.epsilon = parse_double(v, k); }},
      {"eta", [&](const std::string& v, const std::string& k) { raw.eta = parse_double(v, k); }},
      {"log-every", [&](const std::string& v, const std::string& k) { raw.log_every = parse_long(v, k); }},
      {"block-base", [&](const std::string& v, const std::string& k) { raw.block_base = parse_long(v, k); }},
      {"signal-a", [&](const std::string& v, const std::string&) { raw.signal_a = v; }},
      {"signal-b", [&](const std::string& v, const std::string&) { raw.signal_b = v; }},
      {"signal-c", [&](const std::string& v, const std::string&) { raw.signal_c = v; }},
  };
  for (const auto& [key, value] : file) {
    auto it = setters.find(key);
    if (it == setters.end()) {
      std::string valid;
      for (const auto& [name, fn] : setters) {
        (void)fn;
        if (!valid.empty()) valid += ", ";
        valid += name;
      }
      throw orthant::PreconditionError("config file: unknown key '" + key + "'; valid: " + valid);
    }
    if (cmd.get_option("--" + key)->count() > 0) continue;  // flags win
    it->second(value, key);
  }
}

void attach_options(CLI::App* cmd, RawOptions& raw) {
  cmd->add_option("--scenario", raw.scenario, "Scenario name (default depends on the command)");
  cmd->add_option("--steps", raw.steps, "Number of stages to play");
  cmd->add_option("--seed", raw.seed, "RNG seed");
  cmd->add_option("--mesh", raw.mesh, "Forecast grid mesh");
  cmd->add_option("--epsilon", raw.epsilon, "Target tolerance for tables and grids");
  cmd->add_option("--eta", raw.eta, "Perturbation override (partial monitoring)");
  cmd->add_option("--adversary", raw.adversary,
                  "Opponent: uniform, const:<j>, iid:<p,...>, periodic:<j,...>, adaptive");
  cmd->add_option("--out", raw.out, "Write the trace to this path instead of stdout");
  cmd->add_option("--format", raw.format, "Trace format: csv or jsonl");
  cmd->add_option("--log-every", raw.log_every, "Extra logging stride (0 = steps/100)");
  cmd->add_option("--block-base", raw.block_base, "First block length of the doubling schedule");
  cmd->add_option("--signal-a", raw.signal_a, "Signal symbol a as comma-separated probabilities");
  cmd->add_option("--signal-b", raw.signal_b, "Signal symbol b as comma-separated probabilities");
  cmd->add_option("--signal-c", raw.signal_c, "Signal symbol c as comma-separated probabilities");
  cmd->add_option("--config", raw.config_path, "Flat key=value file; explicit flags override it");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seeded experiments: regret minimization, calibrated forecasting, "
               "approachability, partial monitoring"};
  app.require_subcommand(1);

  RawOptions raw;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"internal-regret", "Internal-regret engine on vector outcomes"},
      {"calibrate", "Calibrated forecasting over a simplex grid"},
      {"approach-blackwell", "Direct approachability strategy"},
      {"approach-calibrated", "Approachability through calibrated forecasts"},
      {"halfspace", "Approach an intersection of halfspaces via the orthant reduction"},
      {"partial-monitor", "Partial-monitoring session with regret reports"},
      {"doubling", "Doubling-trick wrapper over partial monitoring"},
  };
  for (const auto& [name, description] : commands) {
    attach_options(app.add_subcommand(name, description), raw);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    if (!raw.config_path.empty()) {
      merge_config(read_config_file(raw.config_path), *cmd, raw);
    }

    orthant::RunConfig cfg;
    cfg.command = cmd->get_name();
    cfg.scenario = raw.scenario;
    cfg.adversary = raw.adversary;
    cfg.out = raw.out;
    cfg.format = raw.format;
    cfg.steps = raw.steps;
    cfg.seed = raw.seed;
    cfg.mesh = raw.mesh;
    cfg.epsilon = raw.epsilon;
    cfg.eta = raw.eta;
    cfg.log_every = raw.log_every;
    cfg.block_base = raw.block_base;
    cfg.signal_a = parse_vector(raw.signal_a, "signal-a");
    cfg.signal_b = parse_vector(raw.signal_b, "signal-b");
    cfg.signal_c = parse_vector(raw.signal_c, "signal-c");

    orthant::MetricTrace trace = orthant::run_experiment(cfg);
    if (cfg.out.empty()) orthant::write_trace(trace, cfg.format, std::cout);
    return 0;
  } catch (const orthant::PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const orthant::GridBudgetError& e) {
    std::cerr << "config error: " << e.what() << " (about " << e.estimated_points << " points)\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
