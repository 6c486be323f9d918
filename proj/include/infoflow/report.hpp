#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "infoflow/flow_analysis.hpp"
#include "infoflow/synth_oracle.hpp"

namespace infoflow {

/// Everything a run needs. Exactly one of input_path / synth_spec is used
/// depending on the command.
struct RunConfig {
  std::string input_path;       // analyze, shuffle-test
  std::string synth_spec_path;  // synth
  std::vector<int> k_set{1, 2, 3, 4, 5};
  std::vector<int> l_set{1, 2, 3, 4, 5};
  double alpha = 0.05;
  bool shuffle = false;
  std::uint64_t master_seed = 0;
  int apen_m = 2;
  double apen_r_frac = 0.20;
  bool drop_incomplete = false;
  std::string out_dir;
  bool write_csv = true;
  bool write_json = true;
  int threads = 0;  // execution detail; never recorded in the manifest

  void validate() const;  // throws ConfigError
};

struct RunSummary {
  /// Highest per-cell fraction of unclassifiable pairs; > 0.5 is the CLI's
  /// exit-code-4 condition.
  double max_unclassifiable_fraction = 0.0;
  std::vector<std::filesystem::path> files_written;
};

/// Doubles in reports are printed with %.17g: round-trip exact for IEEE
/// doubles and byte-stable across runs.
std::string format_double(double v);

/// FNV-1a 64-bit over a byte string, hex-encoded. Used for the manifest
/// hash and the input-file fingerprint.
std::string fnv1a64_hex(const std::string& bytes);

/// Parses a synthetic-panel spec file (key = value lines; '#' comments):
///   n_tickers = 16
///   horizon   = 750
///   noise_sigma = 1.0
///   seed = 7
///   ar = 0.0              # one value broadcast, or comma list per ticker
///   coupling = 0,8,1,0.35 # source,target,lag,coeff -- repeatable
SynthSpec parse_synth_spec(const std::string& path);

// Each command loads or generates the panel, optionally shuffles it, runs
// the (k, l) sweep plus the ApEn ranking, and writes the fr_curves / pairs /
// apen tables (CSV and/or JSON) plus manifest.json into out_dir. synth also
// writes the ground-truth couplings table. shuffle-test runs analyze twice,
// into out_dir/original and out_dir/shuffled. On failure, files already
// written for the failed run are removed.
RunSummary run_analyze(const RunConfig& config);
RunSummary run_synth(const RunConfig& config);
RunSummary run_shuffle_test(const RunConfig& config);

}  // namespace infoflow
