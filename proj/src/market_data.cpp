#include "infoflow/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "infoflow/errors.hpp"
#include "infoflow/rng.hpp"

namespace infoflow {

namespace {

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    fields.push_back(trim(std::string_view(line).substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

bool parse_price(const std::string& cell, double* out) {
  const char* first = cell.data();
  const char* last = first + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, *out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace

void PricePanel::validate() const {
  if (static_cast<Eigen::Index>(dates.size()) != prices.rows() ||
      static_cast<Eigen::Index>(tickers.size()) != prices.cols()) {
    throw DataError("price panel dimensions do not match date/ticker lists");
  }
  for (size_t t = 1; t < dates.size(); ++t) {
    if (!(dates[t - 1] < dates[t])) throw DataError("non-monotone dates");
  }
  std::unordered_set<std::string> seen(tickers.begin(), tickers.end());
  if (seen.size() != tickers.size()) throw DataError("duplicate tickers");
  if (!(prices.array().isFinite() && (prices.array() > 0.0)).all()) {
    throw DataError("price panel contains non-positive or non-finite values");
  }
}

PricePanel load_prices(std::istream& in, const LoadOptions& opt, LoadReport* report) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("malformed file: empty input");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB &&
      static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);  // UTF-8 BOM
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  auto header = split_line(line);
  if (header.size() < 2 || header[0] != "date") {
    throw DataError("malformed file: header must be 'date,<ticker1>,...'");
  }
  const size_t n_cols = header.size() - 1;
  std::vector<std::string> tickers(header.begin() + 1, header.end());
  {
    std::unordered_set<std::string> seen;
    for (const auto& t : tickers) {
      if (t.empty()) throw DataError("malformed file: empty ticker name in header");
      if (!seen.insert(t).second) throw DataError("duplicate ticker '" + t + "' in header");
    }
  }

  std::vector<std::string> dates;
  std::vector<double> cells;  // row-major staging, NaN = missing
  // first problem seen per column, for reporting
  std::vector<std::string> col_problem(n_cols);

  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != n_cols + 1) {
      throw DataError("malformed file: line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(n_cols + 1));
    }
    const std::string& date = fields[0];
    if (!is_iso_date(date)) {
      throw DataError("malformed file: line " + std::to_string(line_no) +
                      ": bad date '" + date + "' (expected YYYY-MM-DD)");
    }
    if (!dates.empty() && !(dates.back() < date)) {
      throw DataError("non-monotone dates: '" + date + "' at line " +
                      std::to_string(line_no) + " does not follow '" + dates.back() + "'");
    }
    dates.push_back(date);
    for (size_t c = 0; c < n_cols; ++c) {
      const std::string& cell = fields[c + 1];
      double v = std::numeric_limits<double>::quiet_NaN();
      if (cell.empty()) {
        if (col_problem[c].empty()) col_problem[c] = "missing value on " + date;
      } else if (!parse_price(cell, &v)) {
        throw DataError("malformed file: line " + std::to_string(line_no) +
                        ": unparseable price '" + cell + "' for " + tickers[c]);
      } else if (!std::isfinite(v) || v <= 0.0) {
        if (col_problem[c].empty()) col_problem[c] = "non-positive price on " + date;
        v = std::numeric_limits<double>::quiet_NaN();
      }
      cells.push_back(v);
    }
  }
  if (dates.empty()) throw DataError("malformed file: no data rows");

  std::vector<size_t> keep;
  std::vector<std::string> complaints;
  for (size_t c = 0; c < n_cols; ++c) {
    if (col_problem[c].empty()) {
      keep.push_back(c);
    } else {
      complaints.push_back(tickers[c] + ": " + col_problem[c]);
    }
  }
  if (!complaints.empty() && !opt.drop_incomplete) {
    std::ostringstream msg;
    msg << "incomplete tickers (set drop_incomplete to drop them): ";
    for (size_t i = 0; i < complaints.size(); ++i) {
      if (i) msg << "; ";
      msg << complaints[i];
    }
    throw DataError(msg.str());
  }
  if (keep.empty()) throw DataError("zero usable tickers");

  PricePanel panel;
  panel.dates = std::move(dates);
  panel.prices.resize(static_cast<Eigen::Index>(panel.dates.size()),
                      static_cast<Eigen::Index>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) {
    panel.tickers.push_back(tickers[keep[k]]);
    for (size_t t = 0; t < panel.dates.size(); ++t) {
      panel.prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) =
          cells[t * n_cols + keep[k]];
    }
  }
  if (report) {
    for (size_t c = 0; c < n_cols; ++c) {
      if (!col_problem[c].empty()) {
        report->dropped_tickers.push_back(tickers[c]);
        report->messages.push_back("dropped " + tickers[c] + ": " + col_problem[c]);
      }
    }
  }
  return panel;
}

PricePanel load_prices_file(const std::string& path, const LoadOptions& opt,
                            LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open price file '" + path + "'");
  return load_prices(in, opt, report);
}

ReturnPanel log_returns(const PricePanel& panel) {
  const Eigen::Index T = panel.n_days();
  if (T < 2) throw DataError("need at least two price rows to form returns");
  ReturnPanel out;
  out.tickers = panel.tickers;
  out.time_scale = 1;
  out.provenance = Provenance::Original;
  out.returns = panel.prices.bottomRows(T - 1).array().log() -
                panel.prices.topRows(T - 1).array().log();
  return out;
}

ReturnPanel aggregate_returns(const ReturnPanel& daily, int k) {
  if (k < 1) throw std::invalid_argument("time scale k must be >= 1");
  if (daily.time_scale != 1) {
    throw std::invalid_argument("aggregate_returns expects a time_scale == 1 panel");
  }
  if (k == 1) return daily;
  const Eigen::Index T = daily.n_rows();
  if (T < k) {
    throw DataError("cannot aggregate " + std::to_string(T) + " rows at time scale " +
                    std::to_string(k));
  }
  const Eigen::Index blocks = T / k;
  ReturnPanel out;
  out.tickers = daily.tickers;
  out.time_scale = k;
  out.provenance = daily.provenance;
  out.master_seed = daily.master_seed;
  out.returns.resize(blocks, daily.n_tickers());
  for (Eigen::Index j = 0; j < blocks; ++j) {
    out.returns.row(j) = daily.returns.middleRows(j * k, k).colwise().sum();
  }
  return out;
}

ReturnPanel shuffle_panel(const ReturnPanel& panel, std::uint64_t master_seed) {
  ReturnPanel out = panel;
  out.provenance = Provenance::Shuffled;
  out.master_seed = master_seed;
  const Eigen::Index T = out.n_rows();
  for (Eigen::Index c = 0; c < out.n_tickers(); ++c) {
    Stream stream(derive_stream_seed(master_seed, static_cast<std::uint64_t>(c)));
    // Fisher-Yates, descending; uniform over all T! orderings
    for (Eigen::Index t = T - 1; t > 0; --t) {
      const auto j = static_cast<Eigen::Index>(
          stream.below(static_cast<std::uint64_t>(t) + 1));
      std::swap(out.returns(t, c), out.returns(j, c));
    }
  }
  return out;
}

}  // namespace infoflow
