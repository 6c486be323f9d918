#include "infoflow/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "infoflow/errors.hpp"
#include "infoflow/parallel.hpp"

namespace infoflow {

namespace {

void check_embedding(int m) {
  if (m < 1) throw std::invalid_argument("embedding dimension m must be >= 1");
}

void check_tolerance(double r_abs) {
  if (std::isnan(r_abs) || r_abs < 0.0) {
    throw std::invalid_argument("tolerance r_abs must be >= 0");
  }
}

// Mean of ln(B_i / M), accumulated in ascending i. Same operation order as
// the naive transcription, so identical counts give bit-identical values.
double phi_from_counts(const std::vector<std::int64_t>& counts) {
  const auto windows = static_cast<double>(counts.size());
  double total = 0.0;
  for (const std::int64_t b : counts) {
    total += std::log(static_cast<double>(b) / windows);
  }
  return total / windows;
}

double sample_std(std::span<const double> series) {
  double lo = series[0], hi = series[0];
  for (const double v : series) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo == hi) return 0.0;  // constant series: exactly zero, no mean roundoff
  const auto n = static_cast<double>(series.size());
  double sum = 0.0;
  for (const double v : series) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (const double v : series) {
    const double d = v - mean;
    ss += d * d;
  }
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

double phi(std::span<const double> series, int m, double r_abs) {
  check_embedding(m);
  check_tolerance(r_abs);
  const auto n = static_cast<std::int64_t>(series.size());
  if (n < m + 1) {
    throw DataError("series too short for phi: need at least m + 1 = " +
                    std::to_string(m + 1) + " points, got " + std::to_string(n));
  }
  const std::int64_t windows = n - m + 1;
  std::vector<std::int64_t> counts(static_cast<size_t>(windows), 1);  // self-match
  const double* u = series.data();
  for (std::int64_t i = 0; i < windows; ++i) {
    for (std::int64_t j = i + 1; j < windows; ++j) {
      bool within = true;
      for (int k = 0; k < m; ++k) {
        if (std::fabs(u[i + k] - u[j + k]) > r_abs) {
          within = false;
          break;
        }
      }
      if (within) {
        ++counts[static_cast<size_t>(i)];
        ++counts[static_cast<size_t>(j)];
      }
    }
  }
  return phi_from_counts(counts);
}

ApEnScore apen(std::span<const double> series, int m, double r_frac) {
  check_embedding(m);
  if (std::isnan(r_frac) || r_frac < 0.0) {
    throw std::invalid_argument("tolerance fraction r_frac must be >= 0");
  }
  const auto n = static_cast<std::int64_t>(series.size());
  if (n < m + 2) {
    throw DataError("series too short for apen: need at least m + 2 = " +
                    std::to_string(m + 2) + " points, got " + std::to_string(n));
  }

  ApEnScore score;
  score.m = m;
  score.r_frac = r_frac;
  score.r_abs = r_frac * sample_std(series);
  const double r = score.r_abs;

  // One fused pass over window pairs: a pair within tolerance at dimension m
  // is the only candidate for dimension m+1, where it must additionally
  // match at offset m. Counts are exact integers, so the result is
  // bit-identical to two independent naive passes.
  const std::int64_t w_m = n - m + 1;
  const std::int64_t w_m1 = n - m;
  std::vector<std::int64_t> counts_m(static_cast<size_t>(w_m), 1);
  std::vector<std::int64_t> counts_m1(static_cast<size_t>(w_m1), 1);
  const double* u = series.data();
  for (std::int64_t i = 0; i < w_m; ++i) {
    for (std::int64_t j = i + 1; j < w_m; ++j) {
      bool within = true;
      for (int k = 0; k < m; ++k) {
        if (std::fabs(u[i + k] - u[j + k]) > r) {
          within = false;
          break;
        }
      }
      if (!within) continue;
      ++counts_m[static_cast<size_t>(i)];
      ++counts_m[static_cast<size_t>(j)];
      if (j < w_m1 && std::fabs(u[i + m] - u[j + m]) <= r) {
        ++counts_m1[static_cast<size_t>(i)];
        ++counts_m1[static_cast<size_t>(j)];
      }
    }
  }
  score.value = phi_from_counts(counts_m) - phi_from_counts(counts_m1);
  return score;
}

std::map<std::string, ApEnScore> efficiency_rank(const ReturnPanel& panel, int m,
                                                 double r_frac, int threads) {
  const auto n = static_cast<size_t>(panel.n_tickers());
  const auto rows = static_cast<size_t>(panel.n_rows());
  std::vector<ApEnScore> scores(n);
  std::vector<std::string> failures(n);
  parallel_for(n, threads, [&](size_t begin, size_t end) {
    for (size_t c = begin; c < end; ++c) {
      std::span<const double> column(panel.returns.col(static_cast<Eigen::Index>(c)).data(),
                                     rows);
      try {
        scores[c] = apen(column, m, r_frac);
        scores[c].ticker = panel.tickers[c];
      } catch (const std::exception& e) {
        failures[c] = e.what();
      }
    }
  });
  std::ostringstream problems;
  bool any_failed = false;
  for (size_t c = 0; c < n; ++c) {
    if (!failures[c].empty()) {
      if (any_failed) problems << "; ";
      problems << panel.tickers[c] << ": " << failures[c];
      any_failed = true;
    }
  }
  if (any_failed) throw DataError("apen failed for ticker(s): " + problems.str());
  std::map<std::string, ApEnScore> out;
  for (size_t c = 0; c < n; ++c) out[panel.tickers[c]] = scores[c];
  return out;
}

}  // namespace infoflow
