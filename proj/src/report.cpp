#include "infoflow/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "infoflow/errors.hpp"
#include "infoflow/version.hpp"

namespace infoflow {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Null-aware double cell: NaN serializes as an empty CSV cell / JSON null
// (used for the p-values of unclassifiable pairs).
std::string csv_cell(double v) { return std::isnan(v) ? std::string() : format_double(v); }
std::string json_cell(double v) { return std::isnan(v) ? std::string("null") : format_double(v); }

// Writes one logical table to CSV and/or JSON, row by row: the pairs table
// can run to millions of rows, so nothing is buffered. fill_row populates
// the CSV cells and the JSON value tokens for one row index.
struct TableWriter {
  const RunConfig& config;
  const fs::path out_dir;
  const std::string manifest_hash;
  std::vector<fs::path>* files_written;

  using RowFiller =
      std::function<void(size_t, std::vector<std::string>&, std::vector<std::string>&)>;

  void write(const std::string& name, const std::vector<std::string>& columns,
             size_t n_rows, const RowFiller& fill_row) const {
    std::ofstream csv, json;
    if (config.write_csv) {
      const fs::path path = out_dir / (name + ".csv");
      csv.open(path, std::ios::binary);
      if (!csv) throw DataError("cannot write '" + path.string() + "'");
      files_written->push_back(path);
      csv << "# manifest_hash=" << manifest_hash << "\n";
      for (size_t c = 0; c < columns.size(); ++c) {
        if (c) csv << ',';
        csv << columns[c];
      }
      csv << '\n';
    }
    if (config.write_json) {
      const fs::path path = out_dir / (name + ".json");
      json.open(path, std::ios::binary);
      if (!json) throw DataError("cannot write '" + path.string() + "'");
      files_written->push_back(path);
      json << "{\n  \"table\": \"" << name << "\",\n  \"manifest_hash\": \""
           << manifest_hash << "\",\n  \"rows\": [";
    }
    std::vector<std::string> csv_cells, json_cells;
    for (size_t r = 0; r < n_rows; ++r) {
      csv_cells.clear();
      json_cells.clear();
      fill_row(r, csv_cells, json_cells);
      if (config.write_csv) {
        for (size_t c = 0; c < csv_cells.size(); ++c) {
          if (c) csv << ',';
          csv << csv_cells[c];
        }
        csv << '\n';
      }
      if (config.write_json) {
        json << (r ? ",\n    {" : "\n    {");
        for (size_t c = 0; c < columns.size(); ++c) {
          if (c) json << ", ";
          json << '"' << columns[c] << "\": " << json_cells[c];
        }
        json << '}';
      }
    }
    if (config.write_json) json << "\n  ]\n}\n";
  }
};

std::string quoted(const std::string& s) {
  // tickers and class labels are plain identifiers; no escaping needed
  return '"' + s + '"';
}

ordered_json config_json(const RunConfig& config, const std::string& command,
                         const SynthSpec* spec, const std::string& input_fingerprint) {
  ordered_json cfg;
  if (command == "synth") {
    ordered_json sj;
    sj["n_tickers"] = spec->n_tickers;
    sj["horizon"] = spec->horizon;
    sj["noise_sigma"] = spec->noise_sigma;
    sj["seed"] = spec->seed;
    sj["ar"] = spec->ar_coeffs;
    ordered_json cj = ordered_json::array();
    for (const auto& c : spec->couplings) {
      cj.push_back({{"source", c.source}, {"target", c.target}, {"lag", c.lag}, {"coeff", c.coeff}});
    }
    sj["couplings"] = cj;
    cfg["synth_spec"] = sj;
  } else {
    cfg["input"] = config.input_path;
    cfg["input_fnv64"] = input_fingerprint;
    cfg["drop_incomplete"] = config.drop_incomplete;
  }
  cfg["scales"] = config.k_set;
  cfg["lags"] = config.l_set;
  cfg["alpha"] = config.alpha;
  cfg["shuffle"] = config.shuffle;
  cfg["seed"] = config.master_seed;
  cfg["apen_m"] = config.apen_m;
  cfg["apen_r"] = config.apen_r_frac;
  ordered_json formats = ordered_json::array();
  if (config.write_csv) formats.push_back("csv");
  if (config.write_json) formats.push_back("json");
  cfg["formats"] = formats;
  return cfg;
}

// The full pipeline for one panel: sweep, ApEn ranking, curves, reports.
RunSummary run_pipeline(const RunConfig& config, const std::string& command,
                        const ReturnPanel& daily_input, const SynthSpec* spec,
                        const std::string& input_fingerprint,
                        const fs::path& out_dir) {
  RunSummary summary;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create output directory '" + out_dir.string() + "'");

  try {
    const ReturnPanel daily =
        config.shuffle ? shuffle_panel(daily_input, config.master_seed) : daily_input;

    SweepConfig sweep;
    sweep.k_set = config.k_set;
    sweep.l_set = config.l_set;
    sweep.alpha = config.alpha;
    sweep.threads = config.threads;
    const std::vector<FlowMatrix> matrices = analyze_market(daily, sweep);
    const auto scores =
        efficiency_rank(daily, config.apen_m, config.apen_r_frac, config.threads);
    const FrCurves curves = fr_curves(matrices, scores);

    for (const auto& cell : curves.cells) {
      const auto n_pairs = static_cast<double>(
          matrices.front().n_pairs());
      if (n_pairs > 0) {
        summary.max_unclassifiable_fraction =
            std::max(summary.max_unclassifiable_fraction,
                     static_cast<double>(cell.n_unclassifiable) / n_pairs);
      }
    }

    // manifest (and its hash, which every table carries)
    ordered_json manifest;
    manifest["tool"] = kToolName;
    manifest["version"] = kToolVersion;
    manifest["command"] = command;
    manifest["config"] = config_json(config, command, spec, input_fingerprint);
    const std::string hash = fnv1a64_hex(manifest.dump());
    manifest["manifest_hash"] = hash;

    TableWriter writer{config, out_dir, hash, &summary.files_written};

    {
      const fs::path path = out_dir / "manifest.json";
      std::ofstream out(path, std::ios::binary);
      if (!out) throw DataError("cannot write '" + path.string() + "'");
      out << manifest.dump(2) << '\n';
      summary.files_written.push_back(path);
    }

    writer.write(
        "fr_curves",
        {"k", "l", "fr_mutual", "fr_oneway", "fr_none", "fr_eff_forward",
         "fr_eff_backward", "n_tied", "n_unclassifiable"},
        curves.cells.size(),
        [&](size_t r, std::vector<std::string>& csv, std::vector<std::string>& json) {
          const auto& c = curves.cells[r];
          csv = {std::to_string(c.k),           std::to_string(c.l),
                 format_double(c.fr_mutual),    format_double(c.fr_oneway),
                 format_double(c.fr_none),      format_double(c.fr_eff_forward),
                 format_double(c.fr_eff_backward), std::to_string(c.n_tied),
                 std::to_string(c.n_unclassifiable)};
          json = csv;
        });

    const size_t pairs_per_cell = matrices.front().pairs.size();
    writer.write(
        "pairs", {"ticker_i", "ticker_j", "k", "l", "class", "p_xy", "p_yx"},
        matrices.size() * pairs_per_cell,
        [&](size_t r, std::vector<std::string>& csv, std::vector<std::string>& json) {
          const auto& fm = matrices[r / pairs_per_cell];
          const auto& pr = fm.pairs[r % pairs_per_cell];
          const std::string& ti = fm.tickers[static_cast<size_t>(pr.i)];
          const std::string& tj = fm.tickers[static_cast<size_t>(pr.j)];
          const std::string cls = pr.classifiable ? to_string(pr.cls) : "unclassifiable";
          const std::string k = std::to_string(fm.k);
          const std::string l = std::to_string(fm.l);
          csv = {ti, tj, k, l, cls, csv_cell(pr.p_ij), csv_cell(pr.p_ji)};
          json = {quoted(ti),        quoted(tj),         k, l, quoted(cls),
                  json_cell(pr.p_ij), json_cell(pr.p_ji)};
        });

    std::vector<const ApEnScore*> ranked;  // std::map order: sorted by ticker
    ranked.reserve(scores.size());
    for (const auto& [ticker, score] : scores) ranked.push_back(&score);
    writer.write("apen", {"ticker", "value"}, ranked.size(),
                 [&](size_t r, std::vector<std::string>& csv, std::vector<std::string>& json) {
                   csv = {ranked[r]->ticker, format_double(ranked[r]->value)};
                   json = {quoted(ranked[r]->ticker), format_double(ranked[r]->value)};
                 });

    if (command == "synth") {
      writer.write(
          "truth", {"source", "target", "lag", "coeff"}, spec->couplings.size(),
          [&](size_t r, std::vector<std::string>& csv, std::vector<std::string>& json) {
            const auto& c = spec->couplings[r];
            const std::string& src = daily_input.tickers[static_cast<size_t>(c.source)];
            const std::string& dst = daily_input.tickers[static_cast<size_t>(c.target)];
            csv = {src, dst, std::to_string(c.lag), format_double(c.coeff)};
            json = {quoted(src), quoted(dst), std::to_string(c.lag),
                    format_double(c.coeff)};
          });
    }
  } catch (...) {
    // no partial outputs: anything already written for this run is removed
    for (const auto& path : summary.files_written) {
      std::error_code ignore;
      fs::remove(path, ignore);
    }
    throw;
  }
  return summary;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunConfig::validate() const {
  if (k_set.empty() || l_set.empty()) {
    throw ConfigError("scales and lags must be non-empty");
  }
  for (const int k : k_set) {
    if (k < 1) throw ConfigError("scales must all be >= 1");
  }
  for (const int l : l_set) {
    if (l < 1) throw ConfigError("lags must all be >= 1");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0, 1)");
  if (apen_m < 1) throw ConfigError("apen-m must be >= 1");
  if (!(apen_r_frac >= 0.0) || !std::isfinite(apen_r_frac)) {
    throw ConfigError("apen-r must be >= 0");
  }
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (!write_csv && !write_json) throw ConfigError("at least one output format required");
  if (out_dir.empty()) throw ConfigError("output directory required");
}

SynthSpec parse_synth_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open synth spec '" + path + "'");
  SynthSpec spec;
  bool have_ar_scalar = false;
  double ar_scalar = 0.0;
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
      throw ConfigError("synth spec line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    try {
      if (key == "n_tickers") {
        spec.n_tickers = std::stoi(value);
      } else if (key == "horizon") {
        spec.horizon = std::stoi(value);
      } else if (key == "noise_sigma") {
        spec.noise_sigma = std::stod(value);
      } else if (key == "seed") {
        spec.seed = std::stoull(value);
      } else if (key == "ar") {
        spec.ar_coeffs.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
          spec.ar_coeffs.push_back(std::stod(strip(item)));
        }
        if (spec.ar_coeffs.size() == 1) {
          have_ar_scalar = true;
          ar_scalar = spec.ar_coeffs[0];
        }
      } else if (key == "coupling") {
        std::stringstream ss(value);
        std::string item;
        std::vector<std::string> parts;
        while (std::getline(ss, item, ',')) parts.push_back(strip(item));
        if (parts.size() != 4) {
          throw ConfigError("synth spec line " + std::to_string(line_no) +
                            ": coupling needs source,target,lag,coeff");
        }
        Coupling c;
        c.source = std::stoi(parts[0]);
        c.target = std::stoi(parts[1]);
        c.lag = std::stoi(parts[2]);
        c.coeff = std::stod(parts[3]);
        spec.couplings.push_back(c);
      } else {
        throw ConfigError("synth spec line " + std::to_string(line_no) +
                          ": unknown key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("synth spec line " + std::to_string(line_no) +
                        ": cannot parse value '" + value + "'");
    }
  }
  if (have_ar_scalar && spec.n_tickers > 1) {
    spec.ar_coeffs.assign(static_cast<size_t>(spec.n_tickers), ar_scalar);
  }
  spec.validate();
  return spec;
}

RunSummary run_analyze(const RunConfig& config) {
  config.validate();
  if (config.input_path.empty()) throw ConfigError("analyze requires --input");
  const std::string raw = read_file(config.input_path);
  LoadOptions opt;
  opt.drop_incomplete = config.drop_incomplete;
  LoadReport report;
  std::istringstream stream(raw);
  const PricePanel prices = load_prices(stream, opt, &report);
  for (const auto& msg : report.messages) {
    std::fprintf(stderr, "warning: %s\n", msg.c_str());
  }
  const ReturnPanel daily = log_returns(prices);
  return run_pipeline(config, "analyze", daily, nullptr, fnv1a64_hex(raw),
                      fs::path(config.out_dir));
}

RunSummary run_synth(const RunConfig& config) {
  config.validate();
  if (config.synth_spec_path.empty()) throw ConfigError("synth requires --spec");
  const SynthSpec spec = parse_synth_spec(config.synth_spec_path);
  const ReturnPanel daily = gen_var(spec);
  return run_pipeline(config, "synth", daily, &spec, "", fs::path(config.out_dir));
}

RunSummary run_shuffle_test(const RunConfig& config) {
  config.validate();
  if (config.input_path.empty()) throw ConfigError("shuffle-test requires --input");
  const std::string raw = read_file(config.input_path);
  LoadOptions opt;
  opt.drop_incomplete = config.drop_incomplete;
  LoadReport report;
  std::istringstream stream(raw);
  const PricePanel prices = load_prices(stream, opt, &report);
  for (const auto& msg : report.messages) {
    std::fprintf(stderr, "warning: %s\n", msg.c_str());
  }
  const ReturnPanel daily = log_returns(prices);
  const std::string fingerprint = fnv1a64_hex(raw);

  RunConfig original = config;
  original.shuffle = false;
  RunSummary s1 = run_pipeline(original, "shuffle-test", daily, nullptr, fingerprint,
                               fs::path(config.out_dir) / "original");
  RunConfig shuffled = config;
  shuffled.shuffle = true;
  RunSummary s2 = run_pipeline(shuffled, "shuffle-test", daily, nullptr, fingerprint,
                               fs::path(config.out_dir) / "shuffled");

  RunSummary total;
  total.max_unclassifiable_fraction =
      std::max(s1.max_unclassifiable_fraction, s2.max_unclassifiable_fraction);
  total.files_written = std::move(s1.files_written);
  total.files_written.insert(total.files_written.end(), s2.files_written.begin(),
                             s2.files_written.end());
  return total;
}

}  // namespace infoflow
