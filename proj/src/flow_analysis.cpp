#include "infoflow/flow_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "infoflow/errors.hpp"
#include "infoflow/parallel.hpp"

namespace infoflow {

namespace {

constexpr double kRssDegenerateScale = 1e-12;
constexpr double kRankTolerance = 1e-10;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One directed test outcome inside a cell, indexed by (target, source).
struct DirectedOutcome {
  double p = 1.0;
  bool design_error = false;
};

bool diag_ok(const Eigen::MatrixXd& qr_matrix, Eigen::Index cols, double scale) {
  if (scale <= 0.0) return false;
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (std::fabs(qr_matrix(c, c)) <= kRankTolerance * scale) return false;
  }
  return true;
}

// All directed Granger tests for one (k, l) cell.
//
// The restricted model for target y (y_t on [1, y lags]) does not depend
// on the source, so its QR basis is computed once per target and every
// source extends it: the source's lag block is orthogonalized against the
// basis (block Gram-Schmidt, applied twice), the remainder gets its own
// Householder QR, and the unrestricted residual falls out of projecting the
// restricted residual on that remainder basis. Equivalent to a full QR of
// [1, y lags, x lags] up to roundoff, at roughly half the work per pair.
void run_cell(const Eigen::MatrixXd& returns, int lag, int threads,
              std::vector<DirectedOutcome>& ordered) {
  const Eigen::Index t_total = returns.rows();
  const auto n = static_cast<size_t>(returns.cols());
  const Eigen::Index t_eff = t_total - lag;
  const Eigen::Index p1 = lag + 1;
  const int df_den = static_cast<int>(t_eff) - 2 * lag - 1;

  // Per-ticker dependent rows and lag blocks, built once per cell.
  std::vector<Eigen::VectorXd> dep(n);
  std::vector<Eigen::MatrixXd> lag_block(n);
  std::vector<double> lag_scale(n);  // largest lag-column norm, for rank checks
  parallel_for(n, threads, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const auto col = returns.col(static_cast<Eigen::Index>(i));
      dep[i] = col.segment(lag, t_eff);
      lag_block[i].resize(t_eff, lag);
      for (int a = 1; a <= lag; ++a) {
        lag_block[i].col(a - 1) = col.segment(lag - a, t_eff);
      }
      lag_scale[i] = lag_block[i].colwise().norm().maxCoeff();
    }
  });

  ordered.assign(n * n, DirectedOutcome{});
  parallel_for(n, threads, [&](size_t begin, size_t end) {
    Eigen::MatrixXd restricted(t_eff, p1);
    Eigen::MatrixXd q1(t_eff, p1);
    Eigen::MatrixXd remainder(t_eff, lag);
    Eigen::MatrixXd q2(t_eff, lag);
    Eigen::VectorXd resid_r(t_eff);
    Eigen::VectorXd resid_u(t_eff);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr1(t_eff, p1);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr2(t_eff, lag);

    for (size_t j = begin; j < end; ++j) {  // j = target
      restricted.col(0).setOnes();
      restricted.rightCols(lag) = lag_block[j];
      const double scale_r =
          std::max(restricted.col(0).norm(), lag_scale[j]);
      qr1.compute(restricted);
      if (!diag_ok(qr1.matrixQR(), p1, scale_r)) {
        for (size_t i = 0; i < n; ++i) {
          if (i != j) ordered[j * n + i].design_error = true;
        }
        continue;
      }
      q1.setIdentity(t_eff, p1);
      q1.applyOnTheLeft(qr1.householderQ());
      resid_r = dep[j] - q1 * (q1.transpose() * dep[j]);
      const double rss_r = resid_r.squaredNorm();
      const double tss = (dep[j].array() - dep[j].mean()).matrix().squaredNorm();
      const double eps_rss = kRssDegenerateScale * tss;

      for (size_t i = 0; i < n; ++i) {  // i = source
        if (i == j) continue;
        DirectedOutcome& out = ordered[j * n + i];
        remainder = lag_block[i] - q1 * (q1.transpose() * lag_block[i]);
        remainder -= q1 * (q1.transpose() * remainder);  // re-orthogonalize
        qr2.compute(remainder);
        if (!diag_ok(qr2.matrixQR(), lag, lag_scale[i])) {
          out.design_error = true;
          continue;
        }
        q2.setIdentity(t_eff, lag);
        q2.applyOnTheLeft(qr2.householderQ());
        resid_u = resid_r - q2 * (q2.transpose() * resid_r);
        const double rss_u = resid_u.squaredNorm();
        if (rss_u < eps_rss) {
          out.p = 0.0;  // numerically perfect unrestricted fit
          continue;
        }
        const double diff = std::max(0.0, rss_r - rss_u);
        const double f = (diff / lag) / (rss_u / df_den);
        out.p = f_sf(f, lag, df_den);
      }
    }
  });
}

}  // namespace

std::int64_t FlowMatrix::count(FlowClass c) const {
  std::int64_t total = 0;
  for (const auto& p : pairs) {
    if (p.classifiable && p.cls == c) ++total;
  }
  return total;
}

std::int64_t FlowMatrix::n_unclassifiable() const {
  std::int64_t total = 0;
  for (const auto& p : pairs) {
    if (!p.classifiable) ++total;
  }
  return total;
}

double frequency_ratio(std::int64_t count, int n_tickers) {
  if (n_tickers < 2) throw std::invalid_argument("frequency_ratio: need N >= 2");
  const std::int64_t links =
      static_cast<std::int64_t>(n_tickers) * (n_tickers - 1) / 2;
  if (count < 0 || count > links) {
    throw std::invalid_argument("frequency_ratio: count out of range [0, " +
                                std::to_string(links) + "]");
  }
  return static_cast<double>(count) / static_cast<double>(links);
}

std::vector<FlowMatrix> analyze_market(const ReturnPanel& daily,
                                       const SweepConfig& config) {
  if (config.k_set.empty() || config.l_set.empty()) {
    throw ConfigError("analyze_market: k_set and l_set must be non-empty");
  }
  for (const int k : config.k_set) {
    if (k < 1) throw ConfigError("analyze_market: time scales must be >= 1");
  }
  for (const int l : config.l_set) {
    if (l < 1) throw ConfigError("analyze_market: lags must be >= 1");
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw ConfigError("analyze_market: alpha must be in (0, 1)");
  }
  if (daily.time_scale != 1) {
    throw std::invalid_argument("analyze_market expects a time_scale == 1 panel");
  }
  const auto n = static_cast<size_t>(daily.n_tickers());
  if (n < 2) throw DataError("analyze_market: need at least two tickers");

  // Validate every cell up front so a failure names its (k, l) location
  // instead of surfacing mid-sweep.
  const Eigen::Index t_daily = daily.n_rows();
  for (const int k : config.k_set) {
    const Eigen::Index t_k = k == 1 ? t_daily : t_daily / k;
    for (const int l : config.l_set) {
      const Eigen::Index needed = 3 * static_cast<Eigen::Index>(l) + 2;
      if (t_k < needed) {
        throw DataError("cell (k=" + std::to_string(k) + ", l=" + std::to_string(l) +
                        "): aggregated series has " + std::to_string(t_k) +
                        " rows, need at least " + std::to_string(needed));
      }
    }
  }

  std::vector<FlowMatrix> matrices;
  matrices.reserve(config.k_set.size() * config.l_set.size());
  std::vector<DirectedOutcome> ordered;
  for (const int k : config.k_set) {
    const ReturnPanel aggregated = aggregate_returns(daily, k);
    for (const int l : config.l_set) {
      run_cell(aggregated.returns, l, config.threads, ordered);
      FlowMatrix fm;
      fm.k = k;
      fm.l = l;
      fm.tickers = daily.tickers;
      fm.pairs.reserve(n * (n - 1) / 2);
      for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
          const DirectedOutcome& o_ij = ordered[j * n + i];  // i -> j: target j
          const DirectedOutcome& o_ji = ordered[i * n + j];
          PairResult pr;
          pr.i = static_cast<int>(i);
          pr.j = static_cast<int>(j);
          if (o_ij.design_error || o_ji.design_error) {
            pr.classifiable = false;
            pr.p_ij = kNaN;
            pr.p_ji = kNaN;
          } else {
            pr.p_ij = o_ij.p;
            pr.p_ji = o_ji.p;
            pr.cls = classify_from_p(pr.p_ij, pr.p_ji, config.alpha);
          }
          fm.pairs.push_back(pr);
        }
      }
      matrices.push_back(std::move(fm));
    }
  }
  return matrices;
}

FrCurves fr_curves(const std::vector<FlowMatrix>& matrices,
                   const std::map<std::string, ApEnScore>& scores) {
  FrCurves curves;
  curves.cells.reserve(matrices.size());
  for (const auto& fm : matrices) {
    if (!matrices.empty() && fm.tickers != matrices.front().tickers) {
      throw std::invalid_argument("fr_curves: matrices span different ticker universes");
    }
    FrCell cell;
    cell.k = fm.k;
    cell.l = fm.l;
    std::int64_t n_forward = 0;
    std::int64_t n_backward = 0;
    for (const auto& pr : fm.pairs) {
      if (!pr.classifiable) {
        ++cell.n_unclassifiable;
        continue;
      }
      switch (pr.cls) {
        case FlowClass::Mutual:
          ++cell.n_mutual;
          break;
        case FlowClass::NoExchange:
          ++cell.n_none;
          break;
        case FlowClass::OneWayXY:
        case FlowClass::OneWayYX: {
          ++cell.n_oneway;
          const bool i_is_source = pr.cls == FlowClass::OneWayXY;
          const std::string& src = fm.tickers[static_cast<size_t>(i_is_source ? pr.i : pr.j)];
          const std::string& dst = fm.tickers[static_cast<size_t>(i_is_source ? pr.j : pr.i)];
          const auto it_src = scores.find(src);
          const auto it_dst = scores.find(dst);
          if (it_src == scores.end() || it_dst == scores.end()) {
            throw DataError("fr_curves: missing ApEn score for ticker '" +
                            (it_src == scores.end() ? src : dst) + "'");
          }
          const double a_src = it_src->second.value;
          const double a_dst = it_dst->second.value;
          if (a_src > a_dst) {
            ++n_forward;  // flow out of the more efficient member
          } else if (a_src < a_dst) {
            ++n_backward;
          } else {
            ++cell.n_tied;
          }
          break;
        }
      }
    }
    const std::int64_t denom = fm.n_pairs() - cell.n_unclassifiable;
    if (denom > 0) {
      const auto d = static_cast<double>(denom);
      cell.fr_mutual = static_cast<double>(cell.n_mutual) / d;
      cell.fr_oneway = static_cast<double>(cell.n_oneway) / d;
      cell.fr_none = static_cast<double>(cell.n_none) / d;
      cell.fr_eff_forward = static_cast<double>(n_forward) / d;
      cell.fr_eff_backward = static_cast<double>(n_backward) / d;
    }
    curves.cells.push_back(cell);
  }
  return curves;
}

}  // namespace infoflow
