#pragma once

// Shared test helpers, including the independent least-squares oracle:
// explicit normal equations solved by Gaussian elimination in long double.
// Deliberately naive and solver-free so it shares no code path with the
// QR-based implementation it checks.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "infoflow/market_data.hpp"
#include "infoflow/rng.hpp"

namespace testutil {

// RSS of y ~ X via normal equations (X'X) b = X'y in long double.
inline long double normal_eq_rss(const std::vector<std::vector<long double>>& X,
                                 const std::vector<long double>& y) {
  const size_t rows = X.size();
  const size_t cols = X.front().size();
  std::vector<std::vector<long double>> a(cols, std::vector<long double>(cols + 1, 0.0L));
  for (size_t i = 0; i < cols; ++i) {
    for (size_t j = 0; j < cols; ++j) {
      long double s = 0.0L;
      for (size_t r = 0; r < rows; ++r) s += X[r][i] * X[r][j];
      a[i][j] = s;
    }
    long double s = 0.0L;
    for (size_t r = 0; r < rows; ++r) s += X[r][i] * y[r];
    a[i][cols] = s;
  }
  // Gaussian elimination with partial pivoting
  for (size_t col = 0; col < cols; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < cols; ++r) {
      if (std::fabs(static_cast<double>(a[r][col])) >
          std::fabs(static_cast<double>(a[pivot][col]))) {
        pivot = r;
      }
    }
    std::swap(a[col], a[pivot]);
    if (a[col][col] == 0.0L) throw std::runtime_error("oracle: singular normal equations");
    for (size_t r = col + 1; r < cols; ++r) {
      const long double factor = a[r][col] / a[col][col];
      for (size_t c = col; c <= cols; ++c) a[r][c] -= factor * a[col][c];
    }
  }
  std::vector<long double> beta(cols, 0.0L);
  for (size_t i = cols; i-- > 0;) {
    long double s = a[i][cols];
    for (size_t j = i + 1; j < cols; ++j) s -= a[i][j] * beta[j];
    beta[i] = s / a[i][i];
  }
  long double rss = 0.0L;
  for (size_t r = 0; r < rows; ++r) {
    long double fit = 0.0L;
    for (size_t c = 0; c < cols; ++c) fit += X[r][c] * beta[c];
    const long double e = y[r] - fit;
    rss += e * e;
  }
  return rss;
}

// Granger F statistic via the normal-equations oracle: same model layout as
// the implementation (shared T_eff rows, intercept + y lags [+ x lags]).
inline long double granger_f_oracle(const std::vector<double>& x,
                                    const std::vector<double>& y, int lag) {
  const size_t total = y.size();
  const size_t t_eff = total - static_cast<size_t>(lag);
  std::vector<long double> dep(t_eff);
  std::vector<std::vector<long double>> restricted(t_eff), unrestricted(t_eff);
  for (size_t r = 0; r < t_eff; ++r) {
    dep[r] = y[r + static_cast<size_t>(lag)];
    restricted[r].push_back(1.0L);
    for (int a = 1; a <= lag; ++a) restricted[r].push_back(y[r + lag - a]);
    unrestricted[r] = restricted[r];
    for (int a = 1; a <= lag; ++a) unrestricted[r].push_back(x[r + lag - a]);
  }
  const long double rss_r = normal_eq_rss(restricted, dep);
  const long double rss_u = normal_eq_rss(unrestricted, dep);
  const long double df_den = static_cast<long double>(t_eff) - 2.0L * lag - 1.0L;
  return ((rss_r - rss_u) / lag) / (rss_u / df_den);
}

inline std::vector<double> gaussian_series(std::uint64_t seed, size_t n,
                                           double sigma = 1.0) {
  infoflow::Stream stream(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = sigma * stream.gaussian();
  return out;
}

inline infoflow::ReturnPanel panel_from_columns(
    const std::vector<std::vector<double>>& columns) {
  infoflow::ReturnPanel panel;
  panel.time_scale = 1;
  const auto rows = static_cast<Eigen::Index>(columns.front().size());
  panel.returns.resize(rows, static_cast<Eigen::Index>(columns.size()));
  for (size_t c = 0; c < columns.size(); ++c) {
    panel.tickers.push_back("T" + std::to_string(c));
    for (Eigen::Index r = 0; r < rows; ++r) {
      panel.returns(r, static_cast<Eigen::Index>(c)) = columns[c][static_cast<size_t>(r)];
    }
  }
  return panel;
}

}  // namespace testutil
