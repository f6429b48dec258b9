#pragma once

#include <string>
#include <vector>

#include "tabembed/data.hpp"
#include "tabembed/evaluate.hpp"
#include "tabembed/nn.hpp"
#include "tabembed/preprocess.hpp"
#include "tabembed/train.hpp"

namespace tabembed {

// "Backbone-Embedding" model name, e.g. "MLP", "MLP-Q-LR", "MLP-PLR".
struct ModelName {
  std::string backbone;  // only "MLP" is supported
  EmbeddingName embedding = EmbeddingName::Raw;
};

ModelName parse_model_name(const std::string& name);

// Hyperparameters shared by all features (parameters themselves are never
// shared; see Model).
struct EmbeddingHyper {
  Index d_embed = 32;
  Index n_bins = 64;       // quantile bin count for Q-*
  TreeBinOptions tree{64, 16, 0.0};  // for T-*
  Index k = 16;
  double sigma = 0.1;
  Index autodis_meta = 16;
  double autodis_temp = 1.0;
  EncodeKind encode_kind = EncodeKind::Ple;  // ablation switch for the PLE slot
  double gamma = 1.0;
};

struct ExperimentConfig {
  std::string model = "MLP";
  PreprocessKind preprocess = PreprocessKind::Quantile;
  MLPConfig backbone{2, 256, 0.0};
  EmbeddingHyper embedding;
  TrainConfig train_config;
  std::vector<std::uint64_t> seeds{0, 1, 2};
};

// Per-feature specs with bin layouts built from the preprocessed train
// split. Features whose binning degenerates (constant columns) fall back to
// the raw scalar with a stderr warning.
std::vector<EmbeddingSpec> build_specs(const Dataset& dataset, const Matrix& x_train_pre,
                                       const Vector& y_train, const ExperimentConfig& cfg);

struct ExperimentRun {
  std::vector<TrainReport> reports;  // one per seed
  RunSet runs;                       // successful seeds only
  std::vector<EmbeddingSpec> specs;
  PreparedData data;
};

// Full multi-seed experiment: preprocess, bin, encode once; then per seed
// build a model, train, and collect test predictions.
ExperimentRun run_experiment(const Dataset& dataset, const ExperimentConfig& cfg);

// Single training run for one seed on already-prepared data.
TrainReport run_seed(const std::vector<EmbeddingSpec>& specs, const PreparedData& data,
                     const ExperimentConfig& cfg, std::uint64_t seed,
                     Matrix* test_predictions,
                     std::unique_ptr<Model>* model_out = nullptr);

}  // namespace tabembed
