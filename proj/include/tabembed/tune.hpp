#pragma once

#include <variant>
#include <vector>

#include "tabembed/experiment.hpp"
#include "tabembed/types.hpp"

namespace tabembed {

struct ConstDist {
  double value;
};
struct UniformDist {
  double lo, hi;
};
struct LogUniformDist {
  double lo, hi;
};
struct UniformIntDist {
  long lo, hi;  // inclusive
};
// {point, D}: the point mass is drawn with probability `prob`.
struct PointMassMixture {
  double point = 0.0;
  double prob = 0.5;
  std::variant<UniformDist, LogUniformDist> inner;
};

using Dist =
    std::variant<ConstDist, UniformDist, LogUniformDist, UniformIntDist, PointMassMixture>;

double sample(const Dist& dist, Rng& rng);

// Random-search spaces for the MLP backbone and embedding hyperparameters.
struct SearchSpace {
  Dist n_layers = UniformIntDist{1, 16};
  Dist layer_size = UniformIntDist{1, 1024};
  Dist dropout = PointMassMixture{0.0, 0.5, UniformDist{0.0, 0.5}};
  Dist learning_rate = LogUniformDist{5e-5, 0.005};
  Dist weight_decay = PointMassMixture{0.0, 0.5, LogUniformDist{1e-6, 1e-3}};

  Dist d_embed = UniformIntDist{1, 128};
  Dist n_quantile_bins = UniformIntDist{2, 256};
  Dist tree_max_leaves = UniformIntDist{2, 256};
  Dist tree_min_samples_leaf = UniformIntDist{1, 128};
  Dist tree_min_info_gain = LogUniformDist{1e-9, 0.01};
  Dist periodic_k = UniformIntDist{1, 128};
  Dist periodic_sigma = LogUniformDist{0.01, 100.0};
};

struct TuneTrial {
  ExperimentConfig config;
  double val_metric = 0.0;
  double train_seconds = 0.0;
  bool failed = false;
};

struct TuneResult {
  std::vector<TuneTrial> trials;
  std::size_t best_index = 0;

  const ExperimentConfig& best_config() const { return trials[best_index].config; }
};

// Draws one full config (backbone + training + embedding hyperparameters
// relevant to the base config's model name) from the space.
ExperimentConfig sample_config(const ExperimentConfig& base, const SearchSpace& space,
                               Rng& rng);

// Samples `budget` configs i.i.d., trains each with a single seed, and picks
// the best validation metric (ties broken by earlier draw). The test split
// is never read during tuning.
TuneResult random_search_tune(const Dataset& dataset, const ExperimentConfig& base,
                              const SearchSpace& space, int budget, std::uint64_t seed);

}  // namespace tabembed
