#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace infoflow {

/// Date-aligned matrix of daily closing prices. Rows follow `dates`
/// (strictly increasing ISO-8601 strings), columns follow `tickers`
/// (unique). Every price is finite and strictly positive once loaded;
/// there are no missing cells.
struct PricePanel {
  std::vector<std::string> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd prices;  // |dates| x |tickers|

  Eigen::Index n_days() const { return prices.rows(); }
  Eigen::Index n_tickers() const { return prices.cols(); }

  /// Re-checks all structural invariants; throws DataError on violation.
  void validate() const;
};

enum class Provenance { Original, Shuffled };

/// Panel of log returns. time_scale == 1 holds day-over-day returns;
/// time_scale == k > 1 holds non-overlapping k-day block sums of those.
struct ReturnPanel {
  std::vector<std::string> tickers;
  Eigen::MatrixXd returns;  // T' x |tickers|
  int time_scale = 1;
  Provenance provenance = Provenance::Original;
  std::uint64_t master_seed = 0;  // meaningful only when Shuffled

  Eigen::Index n_rows() const { return returns.rows(); }
  Eigen::Index n_tickers() const { return returns.cols(); }
};

struct LoadOptions {
  /// When set, tickers with any missing or non-positive cell are dropped
  /// (and reported); when unset such tickers raise DataError. There is no
  /// imputation path.
  bool drop_incomplete = false;
};

struct LoadReport {
  std::vector<std::string> dropped_tickers;
  std::vector<std::string> messages;
};

/// Parses a wide-format delimited text panel:
///   date,<ticker1>,<ticker2>,...
///   2004-01-02,17345.50,102.25,...
/// First column: ISO-8601 dates, strictly increasing. Remaining columns:
/// decimal prices; an empty cell means missing.
PricePanel load_prices(std::istream& in, const LoadOptions& opt = {},
                       LoadReport* report = nullptr);
PricePanel load_prices_file(const std::string& path, const LoadOptions& opt = {},
                            LoadReport* report = nullptr);

/// Day-over-day log returns: entry (t, i) = ln prices(t+1, i) - ln prices(t, i).
/// One row fewer than the price panel. Requires at least two price rows.
ReturnPanel log_returns(const PricePanel& panel);

/// Non-overlapping k-day aggregation of a daily (time_scale == 1) panel:
/// output row j sums input rows [j*k, (j+1)*k); trailing remainder rows are
/// discarded. k == 1 returns the panel unchanged.
ReturnPanel aggregate_returns(const ReturnPanel& daily, int k);

/// Independently permutes each column with a generator seeded by
/// derive_stream_seed(master_seed, column_index), preserving the column's
/// value multiset exactly. Pure function of (panel, master_seed).
ReturnPanel shuffle_panel(const ReturnPanel& panel, std::uint64_t master_seed);

}  // namespace infoflow
