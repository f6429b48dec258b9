#include "tabembed/binning.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace tabembed {

Index BinLayout::bin_of(double x) const {
  const Index t = bin_count();
  if (x < boundaries[0]) return 0;
  if (x >= boundaries[t]) return t - 1;
  // upper_bound over b_1..b_T
  const double* begin = boundaries.data() + 1;
  const double* end = boundaries.data() + t + 1;
  return std::upper_bound(begin, end, x) - begin;
}

void BinLayout::validate() const {
  if (boundaries.size() < 2)
    throw std::invalid_argument("BinLayout: need at least 2 boundaries");
  for (Index i = 1; i < boundaries.size(); ++i)
    if (!(boundaries[i - 1] < boundaries[i]))
      throw std::invalid_argument("BinLayout: boundaries not strictly increasing");
}

namespace {

// Empirical quantile, linear interpolation between order statistics: level q
// maps to position q*(n-1) in the sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = q * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

BinLayout quantile_bins(const std::vector<double>& values, Index t_max,
                        Index feature_index) {
  if (values.empty()) throw std::invalid_argument("quantile_bins: empty sample");
  if (t_max < 1) throw std::invalid_argument("quantile_bins: t_max must be >= 1");

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> bounds;
  bounds.reserve(t_max + 1);
  for (Index t = 0; t <= t_max; ++t) {
    const double b = quantile_sorted(sorted, static_cast<double>(t) / static_cast<double>(t_max));
    if (bounds.empty() || b > bounds.back()) bounds.push_back(b);
  }
  if (bounds.size() < 2)
    throw DegenerateFeature("quantile_bins: feature " + std::to_string(feature_index) +
                            " is constant");

  BinLayout layout;
  layout.feature_index = feature_index;
  layout.boundaries = Eigen::Map<const Vector>(bounds.data(), static_cast<Index>(bounds.size()));
  return layout;
}

namespace {

struct SortedSample {
  std::vector<double> x;  // ascending
  std::vector<double> y;  // aligned
};

struct Leaf {
  std::size_t begin;  // range into the sorted sample
  std::size_t end;
  double best_gain = -1.0;
  double best_threshold = 0.0;
  std::size_t best_split = 0;  // index of first element of the right child
};

double region_entropy(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / n;
    h -= p * std::log2(p);
  }
  return h;
}

// Best split of sample[begin, end) by a single left-to-right sweep.
// Candidate thresholds are midpoints between consecutive distinct values.
// Gain is normalized by the leaf size. Returns false if no admissible split.
bool best_split(const SortedSample& s, std::size_t begin, std::size_t end,
                TaskKind task, Index n_classes, Index min_samples_leaf,
                double min_info_gain, Leaf& out) {
  const std::size_t n = end - begin;
  if (n < 2 * static_cast<std::size_t>(min_samples_leaf)) return false;

  double best_gain = 0.0;
  double best_threshold = 0.0;
  std::size_t best_split_at = 0;
  bool found = false;

  const double dn = static_cast<double>(n);
  if (task == TaskKind::Regression) {
    double total = 0.0, total_sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      total += s.y[i];
      total_sq += s.y[i] * s.y[i];
    }
    const double parent_var = total_sq / dn - (total / dn) * (total / dn);

    double left = 0.0, left_sq = 0.0;
    for (std::size_t i = begin; i + 1 < end; ++i) {
      left += s.y[i];
      left_sq += s.y[i] * s.y[i];
      if (s.x[i + 1] <= s.x[i]) continue;  // not a distinct-value gap
      const std::size_t nl = i + 1 - begin, nr = n - nl;
      if (nl < static_cast<std::size_t>(min_samples_leaf) ||
          nr < static_cast<std::size_t>(min_samples_leaf))
        continue;
      const double dl = static_cast<double>(nl), dr = static_cast<double>(nr);
      const double var_l = left_sq / dl - (left / dl) * (left / dl);
      const double right = total - left, right_sq = total_sq - left_sq;
      const double var_r = right_sq / dr - (right / dr) * (right / dr);
      const double gain = parent_var - (dl * var_l + dr * var_r) / dn;
      if (gain > 0.0 && gain >= min_info_gain && gain > best_gain) {
        best_gain = gain;
        best_threshold = 0.5 * (s.x[i] + s.x[i + 1]);
        best_split_at = i + 1;
        found = true;
      }
    }
  } else {
    std::vector<double> total(n_classes, 0.0), left(n_classes, 0.0);
    for (std::size_t i = begin; i < end; ++i) total[static_cast<std::size_t>(s.y[i])] += 1.0;
    const double parent_h = region_entropy(total, dn);

    for (std::size_t i = begin; i + 1 < end; ++i) {
      left[static_cast<std::size_t>(s.y[i])] += 1.0;
      if (s.x[i + 1] <= s.x[i]) continue;
      const std::size_t nl = i + 1 - begin, nr = n - nl;
      if (nl < static_cast<std::size_t>(min_samples_leaf) ||
          nr < static_cast<std::size_t>(min_samples_leaf))
        continue;
      const double dl = static_cast<double>(nl), dr = static_cast<double>(nr);
      std::vector<double> right(n_classes);
      for (Index c = 0; c < n_classes; ++c) right[c] = total[c] - left[c];
      const double gain = parent_h - (dl * region_entropy(left, dl) +
                                      dr * region_entropy(right, dr)) / dn;
      if (gain > 0.0 && gain >= min_info_gain && gain > best_gain) {
        best_gain = gain;
        best_threshold = 0.5 * (s.x[i] + s.x[i + 1]);
        best_split_at = i + 1;
        found = true;
      }
    }
  }

  if (!found) return false;
  out.best_gain = best_gain;
  out.best_threshold = best_threshold;
  out.best_split = best_split_at;
  return true;
}

}  // namespace

BinLayout target_aware_bins(const std::vector<double>& values,
                            const std::vector<double>& targets, TaskKind task,
                            const TreeBinOptions& opts, Index feature_index) {
  if (values.empty() || values.size() != targets.size())
    throw std::invalid_argument("target_aware_bins: values/targets misaligned or empty");
  if (opts.max_leaves < 2)
    throw std::invalid_argument("target_aware_bins: max_leaves must be >= 2");
  if (opts.min_samples_leaf < 1)
    throw std::invalid_argument("target_aware_bins: min_samples_leaf must be >= 1");

  SortedSample s;
  {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    s.x.reserve(values.size());
    s.y.reserve(values.size());
    for (std::size_t i : order) {
      s.x.push_back(values[i]);
      s.y.push_back(targets[i]);
    }
  }

  const double lo = s.x.front(), hi = s.x.back();
  if (!(lo < hi))
    throw DegenerateFeature("target_aware_bins: feature " + std::to_string(feature_index) +
                            " is constant");

  Index n_classes = 0;
  if (task != TaskKind::Regression) {
    for (double y : s.y) n_classes = std::max(n_classes, static_cast<Index>(y) + 1);
  }

  // Leaves kept sorted by value range; each caches its best admissible split.
  std::vector<Leaf> leaves;
  {
    Leaf root{0, s.x.size()};
    root.best_gain = best_split(s, root.begin, root.end, task, n_classes,
                                opts.min_samples_leaf, opts.min_info_gain, root)
                         ? root.best_gain
                         : -1.0;
    leaves.push_back(root);
  }

  std::vector<double> thresholds;
  while (static_cast<Index>(leaves.size()) < opts.max_leaves) {
    // Leaf with maximal gain; on ties the one covering the lower range wins
    // because we scan in range order with a strict comparison.
    std::size_t pick = leaves.size();
    double pick_gain = 0.0;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (leaves[i].best_gain > pick_gain) {
        pick_gain = leaves[i].best_gain;
        pick = i;
      }
    }
    if (pick == leaves.size()) break;

    Leaf& parent = leaves[pick];
    thresholds.push_back(parent.best_threshold);
    Leaf left{parent.begin, parent.best_split};
    Leaf right{parent.best_split, parent.end};
    if (!best_split(s, left.begin, left.end, task, n_classes, opts.min_samples_leaf,
                    opts.min_info_gain, left))
      left.best_gain = -1.0;
    if (!best_split(s, right.begin, right.end, task, n_classes, opts.min_samples_leaf,
                    opts.min_info_gain, right))
      right.best_gain = -1.0;
    leaves[pick] = left;
    leaves.insert(leaves.begin() + static_cast<std::ptrdiff_t>(pick) + 1, right);
  }

  std::sort(thresholds.begin(), thresholds.end());
  BinLayout layout;
  layout.feature_index = feature_index;
  layout.boundaries.resize(static_cast<Index>(thresholds.size()) + 2);
  layout.boundaries[0] = lo;
  for (std::size_t i = 0; i < thresholds.size(); ++i)
    layout.boundaries[static_cast<Index>(i) + 1] = thresholds[i];
  layout.boundaries[layout.boundaries.size() - 1] = hi;
  return layout;
}

void save_bin_layouts(std::ostream& os, const std::vector<BinLayout>& layouts) {
  os << std::setprecision(17);
  for (const auto& l : layouts) {
    os << "feature " << l.feature_index << ' ' << l.boundaries.size();
    for (Index i = 0; i < l.boundaries.size(); ++i) os << ' ' << l.boundaries[i];
    os << '\n';
  }
}

std::vector<BinLayout> load_bin_layouts(std::istream& is) {
  std::vector<BinLayout> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    Index feat = 0, count = 0;
    if (!(ls >> tag >> feat >> count) || tag != "feature")
      throw std::runtime_error("load_bin_layouts: malformed record: " + line);
    BinLayout l;
    l.feature_index = feat;
    l.boundaries.resize(count);
    for (Index i = 0; i < count; ++i)
      if (!(ls >> l.boundaries[i]))
        throw std::runtime_error("load_bin_layouts: truncated boundaries: " + line);
    l.validate();
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace tabembed
