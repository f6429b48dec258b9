#include "tabembed/tune.hpp"

#include <cmath>

namespace tabembed {

double sample(const Dist& dist, Rng& rng) {
  return std::visit(
      [&rng](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstDist>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, UniformDist>) {
          return std::uniform_real_distribution<double>(d.lo, d.hi)(rng);
        } else if constexpr (std::is_same_v<T, LogUniformDist>) {
          const double u =
              std::uniform_real_distribution<double>(std::log(d.lo), std::log(d.hi))(rng);
          return std::exp(u);
        } else if constexpr (std::is_same_v<T, UniformIntDist>) {
          return static_cast<double>(
              std::uniform_int_distribution<long>(d.lo, d.hi)(rng));
        } else {  // PointMassMixture
          if (std::bernoulli_distribution(d.prob)(rng)) return d.point;
          return std::visit(
              [&rng](const auto& inner) { return sample(Dist{inner}, rng); }, d.inner);
        }
      },
      dist);
}

ExperimentConfig sample_config(const ExperimentConfig& base, const SearchSpace& space,
                               Rng& rng) {
  ExperimentConfig cfg = base;
  cfg.backbone.n_layers = static_cast<Index>(sample(space.n_layers, rng));
  cfg.backbone.layer_size = static_cast<Index>(sample(space.layer_size, rng));
  cfg.backbone.dropout = sample(space.dropout, rng);
  cfg.train_config.learning_rate = sample(space.learning_rate, rng);
  cfg.train_config.weight_decay = sample(space.weight_decay, rng);

  const ModelName name = parse_model_name(base.model);
  switch (name.embedding) {
    case EmbeddingName::Raw:
      break;
    case EmbeddingName::Q:
    case EmbeddingName::T:
      break;  // handled below; no linear stage
    default:
      cfg.embedding.d_embed = static_cast<Index>(sample(space.d_embed, rng));
      break;
  }
  if (embedding_uses_bins(name.embedding)) {
    if (name.embedding == EmbeddingName::Q || name.embedding == EmbeddingName::QL ||
        name.embedding == EmbeddingName::QLR || name.embedding == EmbeddingName::QLRLR) {
      cfg.embedding.n_bins = static_cast<Index>(sample(space.n_quantile_bins, rng));
    } else {
      cfg.embedding.tree.max_leaves = static_cast<Index>(sample(space.tree_max_leaves, rng));
      cfg.embedding.tree.min_samples_leaf =
          static_cast<Index>(sample(space.tree_min_samples_leaf, rng));
      cfg.embedding.tree.min_info_gain = sample(space.tree_min_info_gain, rng);
    }
  }
  if (embedding_uses_periodic(name.embedding)) {
    cfg.embedding.k = static_cast<Index>(sample(space.periodic_k, rng));
    cfg.embedding.sigma = sample(space.periodic_sigma, rng);
  }
  return cfg;
}

TuneResult random_search_tune(const Dataset& dataset, const ExperimentConfig& base,
                              const SearchSpace& space, int budget, std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("random_search_tune: budget must be >= 1");
  Rng rng(seed);
  const bool higher_better = metric_is_higher_better(dataset.task);

  TuneResult result;
  for (int trial = 0; trial < budget; ++trial) {
    TuneTrial t;
    t.config = sample_config(base, space, rng);
    t.config.seeds = {seed};

    Preprocessor preproc(t.config.preprocess);
    preproc.fit(dataset.num_rows(dataset.splits.train));
    const Matrix x_train_pre = preproc.apply(dataset.num_rows(dataset.splits.train));
    const auto specs =
        build_specs(dataset, x_train_pre, dataset.label_rows(dataset.splits.train), t.config);
    Preprocessor fresh(t.config.preprocess);
    const PreparedData data = prepare_data(dataset, fresh, specs);

    const TrainReport report = run_seed(specs, data, t.config, seed, nullptr);
    t.failed = report.failed;
    t.val_metric = report.best_val_metric;
    t.train_seconds = report.wall_seconds;
    result.trials.push_back(std::move(t));

    const TuneTrial& cur = result.trials.back();
    const TuneTrial& best = result.trials[result.best_index];
    const bool better =
        !cur.failed && (best.failed ||
                        (higher_better ? cur.val_metric > best.val_metric
                                       : cur.val_metric < best.val_metric));
    if (better) result.best_index = result.trials.size() - 1;
  }
  return result;
}

}  // namespace tabembed
