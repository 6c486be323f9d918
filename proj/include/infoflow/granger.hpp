#pragma once

#include <span>
#include <string>

#include <Eigen/Dense>

namespace infoflow {

/// Result of one directed test "source -> target" at a fixed lag length.
struct GrangerResult {
  std::string source;  // labels are optional; empty when testing raw series
  std::string target;
  int lag = 0;
  double f_stat = 0.0;
  int df_num = 0;  // = lag
  int df_den = 0;  // = T_eff - 2*lag - 1
  double p_value = 1.0;
  bool degenerate = false;  // unrestricted residual numerically zero
};

/// Joint label of an unordered pair (X, Y): information flows both ways,
/// one way, or not at all at the chosen significance level.
enum class FlowClass { Mutual, OneWayXY, OneWayYX, NoExchange };

const char* to_string(FlowClass c);

/// Residual sum of squares of the least-squares fit of y on `regressors`
/// (the caller supplies the intercept column). Solved by column-pivoted
/// Householder QR, not normal equations: lagged regressors of persistent
/// series are routinely ill-conditioned. Throws DegenerateDesignError when
/// the design is rank deficient.
double ols_rss(const Eigen::VectorXd& y, const Eigen::MatrixXd& regressors);

/// P(F_{d1,d2} <= x), via the regularized incomplete beta function.
/// Relative error <= 1e-10 over the supported domain.
double f_cdf(double x, int d1, int d2);

/// Upper tail P(F_{d1,d2} > x), computed directly through the complementary
/// beta argument so small p-values keep full precision. f_cdf + f_sf == 1.
double f_sf(double x, int d1, int d2);

/// Wald F test of the null "x does not help predict y" at lag length `lag`.
/// Unrestricted model: y_t on intercept, y_{t-1..t-lag}, x_{t-1..t-lag};
/// restricted model drops the x lags. Both models share the same
/// T_eff = T - lag estimation rows so the nested F statistic is valid:
///   F = ((RSS_r - RSS_u)/lag) / (RSS_u/(T_eff - 2*lag - 1)).
/// A numerically perfect unrestricted fit (RSS_u below 1e-12 of the centered
/// TSS of y) sets `degenerate` and p_value = 0 instead of dividing by zero.
GrangerResult granger_f_test(std::span<const double> x,
                             std::span<const double> y, int lag);

/// Classification from the two directed results of one unordered pair:
/// both p < alpha -> Mutual; exactly one -> the corresponding OneWay;
/// neither -> NoExchange. Throws std::invalid_argument when the two results
/// do not describe opposite directions of the same pair at the same lag.
FlowClass classify_pair(const GrangerResult& res_xy,
                        const GrangerResult& res_yx, double alpha);

/// Threshold logic shared by classify_pair and the sweep engine.
FlowClass classify_from_p(double p_xy, double p_yx, double alpha);

}  // namespace infoflow
