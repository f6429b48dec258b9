#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tabembed/data.hpp"
#include "tabembed/nn.hpp"
#include "tabembed/preprocess.hpp"
#include "tabembed/types.hpp"

namespace tabembed {

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  Index batch_size = 256;
  Index patience = 16;
  Index max_epochs = 1000;
  std::uint64_t seed = 0;
};

struct EpochMetrics {
  double train_loss;
  double val_metric;
};

struct TrainReport {
  TrainConfig config;
  TaskKind task = TaskKind::Regression;
  std::vector<EpochMetrics> epochs;
  Index best_epoch = -1;
  double best_val_metric = 0.0;
  double test_metric = 0.0;
  bool failed = false;  // NonFiniteActivation aborted the run
  std::string failure;
  double wall_seconds = 0.0;

  void save(std::ostream& os) const;
};

// Preprocessed, encoded, split-resolved view of a dataset, ready for
// training. Regression targets are standardized; raw targets kept for
// metrics in original units. Test reads are counted so harnesses can assert
// the test split is touched exactly once per run.
struct PreparedData {
  TaskKind task = TaskKind::Regression;
  Index n_classes = 0;
  Matrix x_train, x_val, x_test;
  std::vector<Matrix> enc_train, enc_val, enc_test;  // per feature; empty if unused
  Matrix cat_train, cat_val, cat_test;
  Vector y_train, y_val;       // standardized for regression
  Vector y_val_raw, y_test_raw;
  TargetStandardizer target_std;
  mutable int test_access_count = 0;

  Batch batch_rows(const std::vector<Index>& rows) const;  // rows into train
  Batch val_batch() const;
  Batch test_batch() const;  // increments test_access_count
};

// Fits the preprocessor on the train split, encodes Q/T features with the
// bin layouts already present in `specs`, and one-hot expands categoricals.
PreparedData prepare_data(const Dataset& dataset, Preprocessor& preproc,
                          const std::vector<EmbeddingSpec>& specs);

// Validation metric per task: accuracy (up) for classification, RMSE in
// original target units (down) for regression.
bool metric_is_higher_better(TaskKind task);

// Early-stopped AdamW training. One epoch is one shuffled full pass at
// config.batch_size (last partial batch kept). Restores the parameters of
// the best validation epoch, then evaluates the test split once. If
// `test_predictions` is given it receives probabilities (classification,
// row-major flattened) or de-standardized predictions (regression).
TrainReport train(Model& model, const PreparedData& data, const TrainConfig& config,
                  Matrix* test_predictions = nullptr);

// Model predictions on an arbitrary batch: class probabilities or
// de-standardized regression outputs.
Matrix predict(Model& model, const PreparedData& data, const Batch& batch);

}  // namespace tabembed
