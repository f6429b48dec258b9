#include "tabembed/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "tabembed/evaluate.hpp"
#include "tabembed/optimizer.hpp"

namespace tabembed {

void TrainReport::save(std::ostream& os) const {
  nlohmann::json j;
  j["config"] = {{"learning_rate", config.learning_rate},
                 {"weight_decay", config.weight_decay},
                 {"batch_size", config.batch_size},
                 {"patience", config.patience},
                 {"max_epochs", config.max_epochs},
                 {"seed", config.seed}};
  j["task"] = task == TaskKind::Regression ? "regression"
              : task == TaskKind::Binclass ? "binclass"
                                           : "multiclass";
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : epochs)
    rows.push_back({{"train_loss", e.train_loss}, {"val_metric", e.val_metric}});
  j["epochs"] = std::move(rows);
  j["best_epoch"] = best_epoch;
  j["best_val_metric"] = best_val_metric;
  j["test_metric"] = test_metric;
  j["failed"] = failed;
  if (failed) j["failure"] = failure;
  j["wall_seconds"] = wall_seconds;
  os << j.dump(2) << '\n';
}

namespace {

std::vector<Matrix> slice_encodings(const std::vector<Matrix>& enc,
                                    const std::vector<Index>& rows) {
  std::vector<Matrix> out(enc.size());
  for (std::size_t f = 0; f < enc.size(); ++f) {
    if (enc[f].size() == 0) continue;
    out[f].resize(static_cast<Index>(rows.size()), enc[f].cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
      out[f].row(static_cast<Index>(i)) = enc[f].row(rows[i]);
  }
  return out;
}

Matrix slice_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

}  // namespace

Batch PreparedData::batch_rows(const std::vector<Index>& rows) const {
  Batch b;
  b.x_num = slice_rows(x_train, rows);
  b.encodings = slice_encodings(enc_train, rows);
  if (cat_train.cols() > 0) b.x_cat_onehot = slice_rows(cat_train, rows);
  return b;
}

Batch PreparedData::val_batch() const {
  return Batch{x_val, enc_val, cat_val};
}

Batch PreparedData::test_batch() const {
  ++test_access_count;
  return Batch{x_test, enc_test, cat_test};
}

PreparedData prepare_data(const Dataset& dataset, Preprocessor& preproc,
                          const std::vector<EmbeddingSpec>& specs) {
  if (static_cast<Index>(specs.size()) != dataset.n_num())
    throw InconsistentSpec("prepare_data: one spec per numerical feature required");
  const auto& sp = dataset.splits;
  if (sp.train.empty() || sp.val.empty() || sp.test.empty())
    throw EmptySplit("prepare_data: dataset has no splits assigned");

  PreparedData d;
  d.task = dataset.task;
  d.n_classes = dataset.n_classes();

  preproc.fit(dataset.num_rows(sp.train));
  d.x_train = preproc.apply(dataset.num_rows(sp.train));
  d.x_val = preproc.apply(dataset.num_rows(sp.val));
  d.x_test = preproc.apply(dataset.num_rows(sp.test));

  d.enc_train.resize(specs.size());
  d.enc_val.resize(specs.size());
  d.enc_test.resize(specs.size());
  for (std::size_t f = 0; f < specs.size(); ++f) {
    const auto& spec = specs[f];
    if (spec.encoding_width() == 0) continue;
    std::vector<BinLayout> layout{*spec.bins};
    layout[0].feature_index = static_cast<Index>(f);
    d.enc_train[f] = encode_columns(d.x_train, layout, spec.encode_kind, spec.gamma).blocks[0];
    d.enc_val[f] = encode_columns(d.x_val, layout, spec.encode_kind, spec.gamma).blocks[0];
    d.enc_test[f] = encode_columns(d.x_test, layout, spec.encode_kind, spec.gamma).blocks[0];
  }

  if (dataset.onehot_width() > 0) {
    d.cat_train = dataset.onehot_rows(sp.train);
    d.cat_val = dataset.onehot_rows(sp.val);
    d.cat_test = dataset.onehot_rows(sp.test);
  }

  const Vector y_train_raw = dataset.label_rows(sp.train);
  const Vector y_val = dataset.label_rows(sp.val);
  d.y_val_raw = y_val;
  d.y_test_raw = dataset.label_rows(sp.test);
  if (dataset.task == TaskKind::Regression) {
    d.target_std.fit(y_train_raw);
    d.y_train = d.target_std.apply(y_train_raw);
    d.y_val = d.target_std.apply(y_val);
  } else {
    d.y_train = y_train_raw;
    d.y_val = y_val;
  }
  return d;
}

bool metric_is_higher_better(TaskKind task) { return task != TaskKind::Regression; }

Matrix predict(Model& model, const PreparedData& data, const Batch& batch) {
  const Matrix out = model.forward(batch, /*train=*/false);
  if (data.task == TaskKind::Regression) {
    Matrix pred(out.rows(), 1);
    pred.col(0) = data.target_std.inverse(out.col(0));
    return pred;
  }
  return softmax_rows(out);
}

namespace {

double task_metric(const Matrix& predictions, const Vector& truth_raw, TaskKind task) {
  if (task == TaskKind::Regression) return rmse(predictions.col(0), truth_raw);
  return accuracy(predictions, truth_raw);
}

}  // namespace

TrainReport train(Model& model, const PreparedData& data, const TrainConfig& config,
                  Matrix* test_predictions) {
  const auto t0 = std::chrono::steady_clock::now();
  TrainReport report;
  report.config = config;
  report.task = data.task;

  const Index n = data.x_train.rows();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(config.seed);

  AdamW opt(config.learning_rate, config.weight_decay);
  const bool higher_better = metric_is_higher_better(data.task);
  std::vector<Matrix> best_params = model.snapshot_params();
  Index epochs_without_improvement = 0;

  try {
    for (Index epoch = 0; epoch < config.max_epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      double loss_sum = 0.0;
      for (Index start = 0; start < n; start += config.batch_size) {
        const Index len = std::min(config.batch_size, n - start);
        std::vector<Index> rows(order.begin() + start, order.begin() + start + len);
        const Batch batch = data.batch_rows(rows);
        const Matrix out = model.forward(batch, /*train=*/true);

        Matrix grad;
        double loss;
        if (data.task == TaskKind::Regression) {
          Vector y(len);
          for (Index i = 0; i < len; ++i) y[i] = data.y_train[rows[i]];
          loss = mse_loss(out, y, grad);
        } else {
          std::vector<Index> labels(len);
          for (Index i = 0; i < len; ++i) labels[i] = static_cast<Index>(data.y_train[rows[i]]);
          loss = softmax_cross_entropy(out, labels, grad);
        }
        loss_sum += loss * static_cast<double>(len);

        model.zero_grad();
        model.backward(grad);
        auto params = model.params();
        opt.step(params);
      }

      const Matrix val_pred = predict(model, data, data.val_batch());
      const double val_metric = task_metric(val_pred, data.y_val_raw, data.task);
      report.epochs.push_back({loss_sum / static_cast<double>(n), val_metric});

      const bool improved =
          report.best_epoch < 0 ||
          (higher_better ? val_metric > report.best_val_metric
                         : val_metric < report.best_val_metric);
      if (improved) {
        report.best_epoch = epoch;
        report.best_val_metric = val_metric;
        best_params = model.snapshot_params();
        epochs_without_improvement = 0;
      } else if (++epochs_without_improvement > config.patience) {
        break;
      }
    }
  } catch (const NonFiniteActivation& e) {
    report.failed = true;
    report.failure = e.what();
  }

  model.restore_params(best_params);
  // The test split is only touched when the caller asks for predictions;
  // tuning passes nullptr and never reads it.
  if (!report.failed && test_predictions) {
    *test_predictions = predict(model, data, data.test_batch());
    report.test_metric = task_metric(*test_predictions, data.y_test_raw, data.task);
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace tabembed
