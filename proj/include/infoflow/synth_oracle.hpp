#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "infoflow/market_data.hpp"

namespace infoflow {

/// One lagged linear dependency: target picks up coeff * source(t - lag).
struct Coupling {
  int source = 0;
  int target = 0;
  int lag = 1;       // >= 1; nothing couples contemporaneously
  double coeff = 0.0;
};

/// Specification for a synthetic return panel with known causal structure:
///   r_i(t) = ar_i * r_i(t-1) + sum_{c: c.target == i} c.coeff * r_{c.source}(t - c.lag)
///            + noise_sigma * eps_i(t),   eps iid standard normal.
struct SynthSpec {
  int n_tickers = 0;
  int horizon = 0;  // rows in the emitted panel, after burn-in
  std::vector<Coupling> couplings;
  double noise_sigma = 1.0;
  std::vector<double> ar_coeffs;      // empty = all zero; else one per ticker, |a| < 1
  std::uint64_t seed = 0;
  std::vector<std::string> tickers;   // optional names; default S000, S001, ...

  void validate() const;  // throws ConfigError
};

/// Simulates the VAR above. Noise stream i is seeded by
/// derive_stream_seed(seed, i), so the panel is reproducible for any thread
/// count or generation order. A burn-in of 10 * max(1, max coupling lag)
/// initial rows is generated and discarded to shed the zero-state transient.
ReturnPanel gen_var(const SynthSpec& spec);

/// Literal O(N^2) approximate-entropy transcription: for each embedding
/// dimension, a full double loop over window pairs (self-match included)
/// counting Chebyshev-distance matches. Used as the independent oracle for
/// the optimized entropy implementation; shares no code with it.
double apen_bruteforce(std::span<const double> series, int m, double r_abs);

/// One row of a published F critical-value table.
struct FCheckRow {
  double alpha = 0.05;
  int d1 = 1;
  int d2 = 1;
  double critical_value = 0.0;
};

struct FCheckEntry {
  FCheckRow row;
  double cdf = 0.0;    // f_cdf(critical_value, d1, d2)
  double error = 0.0;  // |cdf - (1 - alpha)|
  bool pass = false;   // error <= 1e-3
};

struct FCheckReport {
  std::vector<FCheckEntry> entries;
  bool all_pass = true;
};

/// Checks f_cdf against published critical values: each row passes when
/// |f_cdf(critical_value) - (1 - alpha)| <= 1e-3. Failures are report
/// entries, never exceptions.
FCheckReport f_oracle_check(std::span<const FCheckRow> table);

}  // namespace infoflow
