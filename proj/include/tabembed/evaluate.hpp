#pragma once

#include <iosfwd>
#include <vector>

#include "tabembed/binning.hpp"
#include "tabembed/types.hpp"

namespace tabembed {

double rmse(const Vector& pred, const Vector& truth);
// Fraction of rows whose argmax matches the integer label.
double accuracy(const Matrix& probabilities, const Vector& truth);

// Per-seed raw test predictions: probabilities (n x n_classes) for
// classification, de-standardized reals (n x 1) for regression.
struct RunSet {
  std::vector<Matrix> predictions;
  std::vector<std::uint64_t> seeds;
  Vector truth;  // raw labels on the shared test index set
  TaskKind task = TaskKind::Regression;

  double run_metric(std::size_t i) const;
};

struct EnsembleResult {
  std::vector<double> group_metrics;  // one per group, seeds grouped in order
  double mean;
  double sd;
};

// Splits the runs into n_groups disjoint groups by seed order, averages raw
// predictions within each group and computes the metric per group.
EnsembleResult ensemble(const RunSet& runs, int n_groups = 3);

// Metrics table: one row per seed, a mean +- sd row, and ensemble rows.
void write_metrics_table(std::ostream& os, const RunSet& runs, int n_groups = 3);

}  // namespace tabembed
