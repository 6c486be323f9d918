#include "infoflow/synth_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>

#include "infoflow/errors.hpp"
#include "infoflow/granger.hpp"
#include "infoflow/rng.hpp"

namespace infoflow {

void SynthSpec::validate() const {
  if (n_tickers < 1) throw ConfigError("synth spec: n_tickers must be >= 1");
  if (horizon < 1) throw ConfigError("synth spec: horizon must be >= 1");
  if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) {
    throw ConfigError("synth spec: noise_sigma must be positive and finite");
  }
  if (!ar_coeffs.empty() && ar_coeffs.size() != static_cast<size_t>(n_tickers)) {
    throw ConfigError("synth spec: ar list must be empty or have one entry per ticker");
  }
  for (const double a : ar_coeffs) {
    if (!(std::fabs(a) < 1.0)) {
      throw ConfigError("synth spec: |ar coefficient| must be < 1 for stationarity");
    }
  }
  for (const auto& c : couplings) {
    if (c.source < 0 || c.source >= n_tickers || c.target < 0 || c.target >= n_tickers) {
      throw ConfigError("synth spec: coupling ticker index out of range");
    }
    if (c.lag < 1) throw ConfigError("synth spec: coupling lag must be >= 1");
    if (!std::isfinite(c.coeff)) throw ConfigError("synth spec: coupling coefficient not finite");
  }
  if (!tickers.empty() && tickers.size() != static_cast<size_t>(n_tickers)) {
    throw ConfigError("synth spec: ticker name list must match n_tickers");
  }
}

ReturnPanel gen_var(const SynthSpec& spec) {
  spec.validate();
  const int n = spec.n_tickers;
  int max_lag = 1;
  for (const auto& c : spec.couplings) max_lag = std::max(max_lag, c.lag);
  const int burn = 10 * max_lag;
  const int total = burn + spec.horizon;

  // Per-ticker noise streams: column i depends only on (seed, i).
  Eigen::MatrixXd noise(total, n);
  for (int i = 0; i < n; ++i) {
    Stream stream(derive_stream_seed(spec.seed, static_cast<std::uint64_t>(i)));
    for (int t = 0; t < total; ++t) {
      noise(t, i) = spec.noise_sigma * stream.gaussian();
    }
  }

  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(total, n);
  for (int t = 0; t < total; ++t) {
    for (int i = 0; i < n; ++i) {
      double v = noise(t, i);
      if (t > 0 && !spec.ar_coeffs.empty()) {
        v += spec.ar_coeffs[static_cast<size_t>(i)] * r(t - 1, i);
      }
      r(t, i) = v;
    }
    for (const auto& c : spec.couplings) {
      if (t - c.lag >= 0) r(t, c.target) += c.coeff * r(t - c.lag, c.source);
    }
  }

  ReturnPanel panel;
  panel.time_scale = 1;
  panel.provenance = Provenance::Original;
  panel.returns = r.bottomRows(spec.horizon);
  if (!spec.tickers.empty()) {
    panel.tickers = spec.tickers;
  } else {
    panel.tickers.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      char name[16];
      std::snprintf(name, sizeof(name), "S%03d", i);
      panel.tickers.emplace_back(name);
    }
  }
  return panel;
}

double apen_bruteforce(std::span<const double> series, int m, double r_abs) {
  if (m < 1) throw std::invalid_argument("apen_bruteforce: m must be >= 1");
  const auto n = static_cast<std::int64_t>(series.size());
  if (n < m + 2) {
    throw DataError("apen_bruteforce: series too short (need m + 2 points)");
  }
  const double* u = series.data();
  // Phi at one embedding dimension: full double loop, self-match included.
  const auto phi_at = [&](int dim) {
    const std::int64_t windows = n - dim + 1;
    double total = 0.0;
    for (std::int64_t i = 0; i < windows; ++i) {
      std::int64_t matches = 0;
      for (std::int64_t j = 0; j < windows; ++j) {
        double dist = 0.0;
        for (int k = 0; k < dim; ++k) {
          dist = std::max(dist, std::fabs(u[i + k] - u[j + k]));
        }
        if (dist <= r_abs) ++matches;
      }
      total += std::log(static_cast<double>(matches) / static_cast<double>(windows));
    }
    return total / static_cast<double>(windows);
  };
  return phi_at(m) - phi_at(m + 1);
}

FCheckReport f_oracle_check(std::span<const FCheckRow> table) {
  FCheckReport report;
  report.entries.reserve(table.size());
  for (const auto& row : table) {
    FCheckEntry entry;
    entry.row = row;
    entry.cdf = f_cdf(row.critical_value, row.d1, row.d2);
    entry.error = std::fabs(entry.cdf - (1.0 - row.alpha));
    entry.pass = entry.error <= 1e-3;
    if (!entry.pass) report.all_pass = false;
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace infoflow
