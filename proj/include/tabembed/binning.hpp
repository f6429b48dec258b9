#pragma once

#include <iosfwd>
#include <vector>

#include "tabembed/types.hpp"

namespace tabembed {

// Strictly increasing boundaries b_0 < ... < b_T defining T half-open bins
// [b_{t-1}, b_t). The last bin is closed on the right by convention of the
// encoders, which treat x >= b_T via extrapolation.
struct BinLayout {
  Vector boundaries;       // length T + 1
  Index feature_index = 0;

  Index bin_count() const { return boundaries.size() - 1; }

  // Index in [0, T-1] of the bin containing x, clamping out-of-range inputs
  // to the first/last bin.
  Index bin_of(double x) const;

  void validate() const;  // throws std::invalid_argument on violation
};

enum class TaskKind { Binclass, Multiclass, Regression };

// Boundaries at uniformly spaced empirical quantiles of `values` (linear
// interpolation between order statistics). Duplicate boundaries are
// collapsed; throws DegenerateFeature if fewer than two survive.
BinLayout quantile_bins(const std::vector<double>& values, Index t_max,
                        Index feature_index = 0);

struct TreeBinOptions {
  Index max_leaves = 2;
  Index min_samples_leaf = 1;
  double min_info_gain = 0.0;
};

// Grows a single-feature decision tree greedily against the targets and
// returns the leaf regions as bins. Interior boundaries are the chosen split
// thresholds; the outer boundaries are min/max of `values`.
//
// Gain is normalized by the size of the leaf being split: variance reduction
// for regression, Shannon information gain for classification. Ties prefer
// the lower threshold, and among leaves the one covering the lower range.
BinLayout target_aware_bins(const std::vector<double>& values,
                            const std::vector<double>& targets, TaskKind task,
                            const TreeBinOptions& opts, Index feature_index = 0);

// Text serialization: one line per layout,
//   "feature <index> <T+1> <b_0> ... <b_T>"
// with 17 significant digits so doubles round-trip exactly.
void save_bin_layouts(std::ostream& os, const std::vector<BinLayout>& layouts);
std::vector<BinLayout> load_bin_layouts(std::istream& is);

}  // namespace tabembed
