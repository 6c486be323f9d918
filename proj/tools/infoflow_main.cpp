// infoflow CLI: all-pairs lead-lag information-flow analysis over a panel of
// asset returns, swept across return time scales and regression lag lengths,
// with shuffled-surrogate controls and ApEn-based efficiency direction.

#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "infoflow/errors.hpp"
#include "infoflow/report.hpp"
#include "infoflow/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDegenerate = 4;

// Grid syntax: "1:5" (inclusive range) or "1,3,5" (explicit list).
std::vector<int> parse_grid(const std::string& text) {
  std::vector<int> out;
  const auto colon = text.find(':');
  try {
    if (colon != std::string::npos) {
      const int lo = std::stoi(text.substr(0, colon));
      const int hi = std::stoi(text.substr(colon + 1));
      if (lo > hi) throw infoflow::ConfigError("grid range '" + text + "' is empty");
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      std::string item;
      std::stringstream ss(text);
      while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    }
  } catch (const infoflow::ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw infoflow::ConfigError("cannot parse grid '" + text + "' (use lo:hi or a,b,c)");
  }
  if (out.empty()) throw infoflow::ConfigError("empty grid '" + text + "'");
  return out;
}

void apply_formats(const std::string& text, infoflow::RunConfig& config) {
  config.write_csv = false;
  config.write_json = false;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    if (item == "csv") {
      config.write_csv = true;
    } else if (item == "json") {
      config.write_json = true;
    } else {
      throw infoflow::ConfigError("unknown format '" + item + "' (csv, json)");
    }
  }
}

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw infoflow::ConfigError("cannot parse boolean '" + value + "'");
}

// Key=value config file with the same keys as the long flags. Command-line
// flags win: a key is applied only when its flag was not given.
void merge_config_file(const std::string& path, CLI::App* cmd,
                       const std::map<std::string, std::function<void(const std::string&)>>& setters) {
  std::ifstream in(path);
  if (!in) throw infoflow::ConfigError("cannot open config file '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw infoflow::ConfigError("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw infoflow::ConfigError("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
    }
    const std::string flag = "--" + key;
    if (cmd->count(flag) > 0) continue;  // flag given: flags win
    try {
      it->second(value);
    } catch (const infoflow::ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw infoflow::ConfigError("config line " + std::to_string(line_no) +
                                  ": cannot parse value '" + value + "'");
    }
  }
}

struct CliState {
  infoflow::RunConfig config;
  std::string scales = "1:5";
  std::string lags = "1:5";
  std::string formats = "csv,json";
  std::string config_path;
};

void add_common_options(CLI::App* cmd, CliState& state) {
  cmd->add_option("--scales", state.scales, "Time scales, e.g. 1:5 or 1,3,5");
  cmd->add_option("--lags", state.lags, "Lag lengths, e.g. 1:5 or 1,2");
  cmd->add_option("--alpha", state.config.alpha, "Significance level");
  cmd->add_option("--seed", state.config.master_seed, "Master seed for shuffling/generation");
  cmd->add_option("--out", state.config.out_dir, "Output directory");
  cmd->add_option("--format", state.formats, "Report formats: csv,json");
  cmd->add_option("--threads", state.config.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--apen-m", state.config.apen_m, "ApEn embedding dimension");
  cmd->add_option("--apen-r", state.config.apen_r_frac, "ApEn tolerance as fraction of std");
  cmd->add_option("--config", state.config_path, "Config file (key=value); flags win");
}

std::map<std::string, std::function<void(const std::string&)>> config_setters(CliState& state) {
  auto& config = state.config;
  return {
      {"input", [&](const std::string& v) { config.input_path = v; }},
      {"spec", [&](const std::string& v) { config.synth_spec_path = v; }},
      {"scales", [&](const std::string& v) { state.scales = v; }},
      {"lags", [&](const std::string& v) { state.lags = v; }},
      {"alpha", [&](const std::string& v) { config.alpha = std::stod(v); }},
      {"shuffle", [&](const std::string& v) { config.shuffle = parse_bool(v); }},
      {"seed", [&](const std::string& v) { config.master_seed = std::stoull(v); }},
      {"out", [&](const std::string& v) { config.out_dir = v; }},
      {"format", [&](const std::string& v) { state.formats = v; }},
      {"threads", [&](const std::string& v) { config.threads = std::stoi(v); }},
      {"drop-incomplete", [&](const std::string& v) { config.drop_incomplete = parse_bool(v); }},
      {"apen-m", [&](const std::string& v) { config.apen_m = std::stoi(v); }},
      {"apen-r", [&](const std::string& v) { config.apen_r_frac = std::stod(v); }},
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(infoflow::kToolName) +
               " - pairwise information-flow analysis across time scales"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(infoflow::kToolVersion));

  CliState state;

  CLI::App* analyze = app.add_subcommand("analyze", "Analyze a price panel file");
  analyze->add_option("--input", state.config.input_path, "Wide-format price panel");
  analyze->add_flag("--shuffle", state.config.shuffle, "Analyze a shuffled surrogate instead");
  analyze->add_flag("--drop-incomplete", state.config.drop_incomplete,
                    "Drop tickers with missing or non-positive prices");
  add_common_options(analyze, state);

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic panel and analyze it");
  synth->add_option("--spec", state.config.synth_spec_path, "Synthetic panel spec file");
  synth->add_flag("--shuffle", state.config.shuffle, "Analyze a shuffled surrogate instead");
  add_common_options(synth, state);

  CLI::App* shuffle_test = app.add_subcommand(
      "shuffle-test", "Analyze original and shuffled panels side by side");
  shuffle_test->add_option("--input", state.config.input_path, "Wide-format price panel");
  shuffle_test->add_flag("--drop-incomplete", state.config.drop_incomplete,
                         "Drop tickers with missing or non-positive prices");
  add_common_options(shuffle_test, state);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    CLI::App* active = analyze->parsed() ? analyze : synth->parsed() ? synth : shuffle_test;
    if (!state.config_path.empty()) {
      merge_config_file(state.config_path, active, config_setters(state));
    }
    state.config.k_set = parse_grid(state.scales);
    state.config.l_set = parse_grid(state.lags);
    apply_formats(state.formats, state.config);

    infoflow::RunSummary summary;
    if (analyze->parsed()) {
      summary = infoflow::run_analyze(state.config);
    } else if (synth->parsed()) {
      summary = infoflow::run_synth(state.config);
    } else {
      summary = infoflow::run_shuffle_test(state.config);
    }

    if (summary.max_unclassifiable_fraction > 0.5) {
      std::fprintf(stderr,
                   "error: numerical degeneracy affected %.1f%% of pairs in at "
                   "least one (k, l) cell; reports were written but are suspect\n",
                   100.0 * summary.max_unclassifiable_fraction);
      return kExitDegenerate;
    }
    std::fprintf(stderr, "wrote %zu files to %s\n", summary.files_written.size(),
                 state.config.out_dir.c_str());
    return kExitOk;
  } catch (const infoflow::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const infoflow::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
}
