#include "tabembed/experiment.hpp"

#include <iostream>
#include <memory>

namespace tabembed {

ModelName parse_model_name(const std::string& name) {
  ModelName out;
  const auto dash = name.find('-');
  out.backbone = name.substr(0, dash);
  if (out.backbone != "MLP")
    throw InconsistentSpec("unknown backbone '" + out.backbone + "'; only MLP is supported");
  if (dash != std::string::npos)
    out.embedding = parse_embedding_name(name.substr(dash + 1));
  return out;
}

std::vector<EmbeddingSpec> build_specs(const Dataset& dataset, const Matrix& x_train_pre,
                                       const Vector& y_train, const ExperimentConfig& cfg) {
  const ModelName name = parse_model_name(cfg.model);
  const auto& h = cfg.embedding;

  std::vector<EmbeddingSpec> specs(dataset.n_num());
  for (Index f = 0; f < dataset.n_num(); ++f) {
    EmbeddingSpec& spec = specs[f];
    spec.name = name.embedding;
    spec.d_embed = h.d_embed;
    spec.k = h.k;
    spec.sigma = h.sigma;
    spec.autodis_meta = h.autodis_meta;
    spec.autodis_temp = h.autodis_temp;
    spec.encode_kind = h.encode_kind;
    spec.gamma = h.gamma;
    if (!embedding_uses_bins(name.embedding)) continue;

    const std::vector<double> column(x_train_pre.col(f).data(),
                                     x_train_pre.col(f).data() + x_train_pre.rows());
    const bool quantile_based =
        name.embedding == EmbeddingName::Q || name.embedding == EmbeddingName::QL ||
        name.embedding == EmbeddingName::QLR || name.embedding == EmbeddingName::QLRLR;
    try {
      if (quantile_based) {
        spec.bins = quantile_bins(column, h.n_bins, f);
      } else {
        const std::vector<double> targets(y_train.data(), y_train.data() + y_train.size());
        spec.bins = target_aware_bins(column, targets, dataset.task, h.tree, f);
      }
    } catch (const DegenerateFeature& e) {
      std::cerr << "warning: " << e.what() << "; feature " << f
                << " falls back to its raw scalar\n";
      spec = EmbeddingSpec{};  // Raw
    }
  }
  return specs;
}

TrainReport run_seed(const std::vector<EmbeddingSpec>& specs, const PreparedData& data,
                     const ExperimentConfig& cfg, std::uint64_t seed,
                     Matrix* test_predictions, std::unique_ptr<Model>* model_out) {
  const Index n_outputs =
      data.task == TaskKind::Regression ? 1 : std::max<Index>(data.n_classes, 2);
  auto model = std::make_unique<Model>(specs, cfg.backbone, data.x_train.cols(),
                                       data.cat_train.cols(), n_outputs, seed);
  TrainConfig tc = cfg.train_config;
  tc.seed = seed;
  TrainReport report = train(*model, data, tc, test_predictions);
  if (model_out) *model_out = std::move(model);
  return report;
}

ExperimentRun run_experiment(const Dataset& dataset, const ExperimentConfig& cfg) {
  ExperimentRun run;

  Preprocessor preproc(cfg.preprocess);
  preproc.fit(dataset.num_rows(dataset.splits.train));
  const Matrix x_train_pre = preproc.apply(dataset.num_rows(dataset.splits.train));
  run.specs = build_specs(dataset, x_train_pre, dataset.label_rows(dataset.splits.train), cfg);

  Preprocessor fresh(cfg.preprocess);
  run.data = prepare_data(dataset, fresh, run.specs);

  run.runs.task = dataset.task;
  run.runs.truth = run.data.y_test_raw;
  for (std::uint64_t seed : cfg.seeds) {
    Matrix test_pred;
    TrainReport report = run_seed(run.specs, run.data, cfg, seed, &test_pred);
    if (!report.failed) {
      run.runs.predictions.push_back(test_pred);
      run.runs.seeds.push_back(seed);
    }
    run.reports.push_back(std::move(report));
  }
  return run;
}

}  // namespace tabembed
