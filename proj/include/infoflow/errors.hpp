#pragma once

#include <stdexcept>

namespace infoflow {

/// Invalid configuration: bad flag values, malformed parameter grids,
/// out-of-range analysis parameters. Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unusable input data: malformed files, non-monotone dates, series too
/// short for the requested analysis. Maps to CLI exit code 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A regression design that cannot be fit: rank-deficient regressors,
/// e.g. a constant (zero-variance) series whose lags duplicate the
/// intercept. Pairs hitting this during a sweep are recorded as
/// unclassifiable rather than aborting the run.
struct DegenerateDesignError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace infoflow
