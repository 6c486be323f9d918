#include "infoflow/granger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "infoflow/errors.hpp"

namespace infoflow {

namespace {

// RSS below this fraction of the centered TSS counts as a numerically
// perfect fit.
constexpr double kRssDegenerateScale = 1e-12;

// A column whose R diagonal falls below this fraction of the largest
// original column norm is treated as linearly dependent.
constexpr double kRankTolerance = 1e-10;

// Continued fraction for the regularized incomplete beta (modified Lentz).
double beta_cont_frac(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

// I_x(a, b), switching to the complementary series where the continued
// fraction converges fast.
double inc_beta_reg(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cont_frac(a, b, x) / a;
  }
  return 1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b;
}

struct QrFit {
  double rss = 0.0;
  bool rank_ok = true;
};

// RSS via column-pivoted Householder QR with an explicit residual (no
// ||y||^2 - ||Q'y||^2 cancellation). column_scale is the largest column
// norm of the matrix the rank question is really about; for a plain design
// that is the design itself.
QrFit qr_rss(const Eigen::VectorXd& y, const Eigen::MatrixXd& design,
             double column_scale) {
  QrFit fit;
  const Eigen::Index cols = design.cols();
  if (column_scale <= 0.0) {
    fit.rank_ok = false;
    return fit;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const auto& r_mat = qr.matrixQR();
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (std::fabs(r_mat(c, c)) <= kRankTolerance * column_scale) {
      fit.rank_ok = false;
      return fit;
    }
  }
  const Eigen::VectorXd beta = qr.solve(y);
  fit.rss = (y - design * beta).squaredNorm();
  return fit;
}

void fill_lag_block(std::span<const double> s, int lag, Eigen::Index t_eff,
                    Eigen::Index col0, Eigen::MatrixXd& design) {
  for (int a = 1; a <= lag; ++a) {
    for (Eigen::Index r = 0; r < t_eff; ++r) {
      design(r, col0 + a - 1) = s[static_cast<size_t>(lag + r - a)];
    }
  }
}

}  // namespace

const char* to_string(FlowClass c) {
  switch (c) {
    case FlowClass::Mutual: return "mutual";
    case FlowClass::OneWayXY: return "oneway_xy";
    case FlowClass::OneWayYX: return "oneway_yx";
    case FlowClass::NoExchange: return "none";
  }
  return "unknown";
}

double ols_rss(const Eigen::VectorXd& y, const Eigen::MatrixXd& regressors) {
  if (regressors.rows() != y.size()) {
    throw std::invalid_argument("ols_rss: regressor rows must match |y|");
  }
  if (regressors.rows() <= regressors.cols()) {
    throw std::invalid_argument("ols_rss: need more observations than regressors");
  }
  const double scale = regressors.colwise().norm().maxCoeff();
  const QrFit fit = qr_rss(y, regressors, scale);
  if (!fit.rank_ok) {
    throw DegenerateDesignError("rank-deficient regression design");
  }
  return fit.rss;
}

double f_cdf(double x, int d1, int d2) {
  if (d1 < 1 || d2 < 1) throw std::invalid_argument("f_cdf: degrees of freedom must be >= 1");
  if (std::isnan(x) || x < 0.0) throw std::invalid_argument("f_cdf: x must be >= 0");
  if (std::isinf(x)) return 1.0;
  const double z = d1 * x / (d1 * x + d2);
  return inc_beta_reg(0.5 * d1, 0.5 * d2, z);
}

double f_sf(double x, int d1, int d2) {
  if (d1 < 1 || d2 < 1) throw std::invalid_argument("f_sf: degrees of freedom must be >= 1");
  if (std::isnan(x) || x < 0.0) throw std::invalid_argument("f_sf: x must be >= 0");
  if (std::isinf(x)) return 0.0;
  const double z = d2 / (d1 * x + d2);
  return inc_beta_reg(0.5 * d2, 0.5 * d1, z);
}

GrangerResult granger_f_test(std::span<const double> x, std::span<const double> y,
                             int lag) {
  if (lag < 1) throw std::invalid_argument("granger_f_test: lag must be >= 1");
  if (x.size() != y.size()) throw std::invalid_argument("granger_f_test: length mismatch");
  const auto total = static_cast<Eigen::Index>(y.size());
  const Eigen::Index t_eff = total - lag;
  const int df_den = static_cast<int>(t_eff) - 2 * lag - 1;
  if (df_den < 1) {
    throw std::invalid_argument("granger_f_test: insufficient observations for lag " +
                                std::to_string(lag));
  }

  Eigen::VectorXd dep(t_eff);
  for (Eigen::Index r = 0; r < t_eff; ++r) dep(r) = y[static_cast<size_t>(lag + r)];

  Eigen::MatrixXd restricted(t_eff, 1 + lag);
  restricted.col(0).setOnes();
  fill_lag_block(y, lag, t_eff, 1, restricted);

  Eigen::MatrixXd unrestricted(t_eff, 1 + 2 * lag);
  unrestricted.leftCols(1 + lag) = restricted;
  fill_lag_block(x, lag, t_eff, 1 + lag, unrestricted);

  const double rss_r = ols_rss(dep, restricted);
  const double rss_u = ols_rss(dep, unrestricted);

  GrangerResult res;
  res.lag = lag;
  res.df_num = lag;
  res.df_den = df_den;

  const double tss = (dep.array() - dep.mean()).matrix().squaredNorm();
  if (rss_u < kRssDegenerateScale * tss) {
    res.degenerate = true;
    res.f_stat = std::numeric_limits<double>::infinity();
    res.p_value = 0.0;
    return res;
  }
  const double diff = std::max(0.0, rss_r - rss_u);
  res.f_stat = (diff / lag) / (rss_u / df_den);
  res.p_value = f_sf(res.f_stat, lag, df_den);
  return res;
}

FlowClass classify_from_p(double p_xy, double p_yx, double alpha) {
  const bool sig_xy = p_xy < alpha;
  const bool sig_yx = p_yx < alpha;
  if (sig_xy && sig_yx) return FlowClass::Mutual;
  if (sig_xy) return FlowClass::OneWayXY;
  if (sig_yx) return FlowClass::OneWayYX;
  return FlowClass::NoExchange;
}

FlowClass classify_pair(const GrangerResult& res_xy, const GrangerResult& res_yx,
                        double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("classify_pair: alpha must be in (0, 1)");
  }
  if (res_xy.lag != res_yx.lag) {
    throw std::invalid_argument("classify_pair: mismatched pair metadata (lag)");
  }
  if ((!res_xy.source.empty() || !res_yx.source.empty()) &&
      (res_xy.source != res_yx.target || res_xy.target != res_yx.source)) {
    throw std::invalid_argument("classify_pair: mismatched pair metadata (direction)");
  }
  return classify_from_p(res_xy.p_value, res_yx.p_value, alpha);
}

}  // namespace infoflow
