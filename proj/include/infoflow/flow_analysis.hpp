#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "infoflow/entropy.hpp"
#include "infoflow/granger.hpp"
#include "infoflow/market_data.hpp"

namespace infoflow {

/// Outcome for one unordered pair in one (k, l) cell. i < j index into the
/// owning FlowMatrix's ticker list. A pair whose regressions hit a
/// degenerate design in either direction is kept with classifiable == false
/// and NaN p-values.
struct PairResult {
  int i = 0;
  int j = 0;
  bool classifiable = true;
  FlowClass cls = FlowClass::NoExchange;
  double p_ij = 1.0;  // p-value of direction i -> j
  double p_ji = 1.0;  // p-value of direction j -> i
};

/// All-pairs classification for one (time scale, lag) cell.
struct FlowMatrix {
  int k = 1;
  int l = 1;
  std::vector<std::string> tickers;
  std::vector<PairResult> pairs;  // every i < j, ordered by (i, j)

  std::int64_t count(FlowClass c) const;
  std::int64_t n_unclassifiable() const;
  std::int64_t n_pairs() const { return static_cast<std::int64_t>(pairs.size()); }
};

struct SweepConfig {
  std::vector<int> k_set{1, 2, 3, 4, 5};
  std::vector<int> l_set{1, 2, 3, 4, 5};
  double alpha = 0.05;
  int threads = 0;  // 0 = hardware concurrency
};

/// count / (N(N-1)/2). Throws std::invalid_argument for N < 2 or a count
/// outside [0, N(N-1)/2].
double frequency_ratio(std::int64_t count, int n_tickers);

/// The all-pairs sweep: for each k the daily panel is aggregated once, then
/// for each lag every unordered pair is tested in both directions and
/// classified at config.alpha. The restricted regression depends only on
/// the target series, so it is fit once per (k, l, target) and shared across
/// all sources. Pairs are partitioned over a worker pool; results land in
/// index-addressed slots, so the output is identical for any thread count.
///
/// Cells too short for the regression (aggregated length < 3l + 2) raise
/// DataError naming the (k, l) cell before any work starts.
std::vector<FlowMatrix> analyze_market(const ReturnPanel& daily,
                                       const SweepConfig& config);

/// Frequency ratios for one (k, l) cell. Denominator for all six ratios is
/// the classifiable-pair count (equal to N(N-1)/2 when nothing degenerated),
/// so fr_mutual + fr_oneway + fr_none == 1 whenever any pair classified.
struct FrCell {
  int k = 1;
  int l = 1;
  std::int64_t n_mutual = 0;
  std::int64_t n_oneway = 0;
  std::int64_t n_none = 0;
  std::int64_t n_unclassifiable = 0;
  std::int64_t n_tied = 0;  // one-way pairs with exactly equal ApEn, excluded
  double fr_mutual = 0.0;
  double fr_oneway = 0.0;
  double fr_none = 0.0;
  double fr_eff_forward = 0.0;   // one-way flows from the higher-ApEn member
  double fr_eff_backward = 0.0;  // one-way flows into the higher-ApEn member
};

struct FrCurves {
  std::vector<FrCell> cells;  // same order as the input matrices
};

/// Collapses FlowMatrices to frequency-ratio curves and splits each one-way
/// flow by efficiency direction: the pair member with strictly higher ApEn
/// is the efficient side; the flow is "forward" when it is the source.
/// Exact ApEn ties are excluded from the directed split and counted.
/// Throws DataError when a ticker in the matrices has no score.
FrCurves fr_curves(const std::vector<FlowMatrix>& matrices,
                   const std::map<std::string, ApEnScore>& scores);

}  // namespace infoflow
