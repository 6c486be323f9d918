#pragma once

#include <map>
#include <span>
#include <string>

#include "infoflow/market_data.hpp"

namespace infoflow {

struct ApEnScore {
  std::string ticker;
  int m = 2;           // embedding dimension
  double r_frac = 0.2; // tolerance as a fraction of the sample std
  double r_abs = 0.0;  // resolved absolute tolerance
  double value = 0.0;
};

/// Mean over all windows i of ln C_i, where C_i is the fraction of length-m
/// windows (self-match included, so C_i > 0 always) within Chebyshev
/// distance r_abs of window i.
double phi(std::span<const double> series, int m, double r_abs);

/// ApEn(m, r) = phi(m, r_abs) - phi(m+1, r_abs), with r_abs = r_frac times
/// the (N-1)-denominator sample standard deviation of the series. A constant
/// series has std 0, every window matches under distance <= 0, and the value
/// comes out exactly 0 with no special casing.
ApEnScore apen(std::span<const double> series, int m = 2, double r_frac = 0.20);

/// ApEn per ticker over the panel's columns (intended for daily returns,
/// whatever the time scale of the surrounding sweep). Higher value = more
/// random = more efficient. Column failures are collected and reported per
/// ticker in a single DataError.
std::map<std::string, ApEnScore> efficiency_rank(const ReturnPanel& panel,
                                                 int m = 2,
                                                 double r_frac = 0.20,
                                                 int threads = 0);

}  // namespace infoflow
