#pragma once

#include <string>
#include <vector>

#include "tabembed/binning.hpp"
#include "tabembed/types.hpp"

namespace tabembed {

struct Splits {
  std::vector<Index> train, val, test;
};

// Immutable tabular dataset: numerical matrix, optional label-encoded
// categorical columns, labels, task kind and train/val/test index sets.
struct Dataset {
  Matrix num_features;                          // n x m
  std::vector<std::vector<Index>> cat_codes;    // per categorical column, n codes
  std::vector<Index> cat_cardinality;           // one-hot width per column
  Vector labels;                                // class index or real target
  TaskKind task = TaskKind::Regression;
  Splits splits;

  Index n_rows() const { return num_features.rows(); }
  Index n_num() const { return num_features.cols(); }
  Index n_classes() const;
  Index onehot_width() const;

  // One-hot block for the given rows; unseen codes (negative) map to
  // all-zero rows.
  Matrix onehot_rows(const std::vector<Index>& rows) const;
  Matrix num_rows(const std::vector<Index>& rows) const;
  Vector label_rows(const std::vector<Index>& rows) const;
};

enum class ColumnRole { Numerical, Categorical, Target };

struct CsvSchema {
  std::vector<ColumnRole> roles;  // one per CSV column, header order
  TaskKind task = TaskKind::Regression;
};

// Loads a headered CSV. Numerical columns parse as reals; categorical
// columns are label-encoded in order of first appearance; classification
// targets are label-encoded the same way. Unparseable cells raise
// ParseError with the 0-based data row and column.
Dataset load_csv(const std::string& path, const CsvSchema& schema);

// Side-car schema file: one line per column, "<name> numerical|categorical|target",
// plus a "task binclass|multiclass|regression" line.
CsvSchema load_schema(const std::string& path);

// Assigns splits in place: stratified by class for classification, random
// for regression. Sizes are ceil(f_val*n) and ceil(f_test*n) with train
// taking the remainder. Deterministic given the seed.
void split(Dataset& dataset, double train_frac, double val_frac, double test_frac,
           std::uint64_t seed);

struct SynthConfig {
  Index n = 10000;
  Index m = 8;
  Index n_trees = 16;
  Index depth = 6;
  std::uint64_t seed = 0;
};

// GBDT-friendly synthetic regression task: features i.i.d. N(0,1), target
// the standardized mean of `n_trees` random decision trees of the given
// depth. Each tree draws one uniform random feature and a chain of `depth`
// N(0,1) thresholds with N(0,1) leaf values, so the target is additive
// across features and exactly piecewise constant per feature. Splits
// 0.64/0.16/0.20.
Dataset synth_gbdt(const SynthConfig& config);

// Writes a dataset back out as CSV (numerical columns then target).
void save_csv(const Dataset& dataset, const std::string& path);

}  // namespace tabembed
