#include <doctest.h>

#include <algorithm>

#include "tabembed/tune.hpp"

using namespace tabembed;

namespace {

Dataset tiny_regression(Index n = 90) {
  Rng rng(300);
  std::normal_distribution<double> normal;
  Dataset ds;
  ds.num_features.resize(n, 2);
  ds.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    ds.num_features(i, 0) = normal(rng);
    ds.num_features(i, 1) = normal(rng);
    ds.labels[i] = ds.num_features(i, 0) - 0.5 * ds.num_features(i, 1) + 0.05 * normal(rng);
  }
  ds.task = TaskKind::Regression;
  split(ds, 0.6, 0.2, 0.2, 3);
  return ds;
}

}  // namespace

TEST_CASE("distribution sampling stays in range") {
  Rng rng(1);
  SUBCASE("const") {
    for (int i = 0; i < 10; ++i) CHECK(sample(ConstDist{3.5}, rng) == 3.5);
  }
  SUBCASE("uniform") {
    for (int i = 0; i < 1000; ++i) {
      const double v = sample(UniformDist{-2.0, 5.0}, rng);
      CHECK(v >= -2.0);
      CHECK(v < 5.0);
    }
  }
  SUBCASE("uniform int hits both endpoints") {
    bool lo = false, hi = false;
    for (int i = 0; i < 1000; ++i) {
      const double v = sample(UniformIntDist{2, 5}, rng);
      CHECK(v == std::floor(v));
      CHECK(v >= 2.0);
      CHECK(v <= 5.0);
      lo |= v == 2.0;
      hi |= v == 5.0;
    }
    CHECK(lo);
    CHECK(hi);
  }
  SUBCASE("log uniform") {
    for (int i = 0; i < 1000; ++i) {
      const double v = sample(LogUniformDist{1e-4, 10.0}, rng);
      CHECK(v >= 1e-4);
      CHECK(v <= 10.0);
    }
  }
}

TEST_CASE("log-uniform draws pass a KS test against the analytic CDF") {
  Rng rng(2);
  const double lo = 1e-3, hi = 1e3;
  const int n = 100000;
  std::vector<double> draws(n);
  for (auto& d : draws) d = sample(LogUniformDist{lo, hi}, rng);
  std::sort(draws.begin(), draws.end());
  // CDF of a log-uniform variable: log(x/lo) / log(hi/lo)
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf = std::log(draws[i] / lo) / std::log(hi / lo);
    ks = std::max(ks, std::fabs(cdf - (i + 1.0) / n));
    ks = std::max(ks, std::fabs(cdf - static_cast<double>(i) / n));
  }
  // critical value at alpha = 0.01 for large n
  CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("point-mass mixtures return the point about half the time") {
  Rng rng(3);
  const PointMassMixture mix{0.0, 0.5, LogUniformDist{1e-6, 1e-3}};
  int zeros = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double v = sample(Dist{mix}, rng);
    if (v == 0.0)
      ++zeros;
    else {
      CHECK(v >= 1e-6);
      CHECK(v <= 1e-3);
    }
  }
  CHECK(zeros > 4700);
  CHECK(zeros < 5300);
}

TEST_CASE("sample_config respects the model's embedding grammar") {
  Rng rng(4);
  SearchSpace space;

  ExperimentConfig base;
  base.model = "MLP-PLR";
  const ExperimentConfig plr = sample_config(base, space, rng);
  CHECK(plr.model == "MLP-PLR");
  CHECK(plr.embedding.k >= 1);
  CHECK(plr.embedding.k <= 128);
  CHECK(plr.embedding.sigma >= 0.01);
  CHECK(plr.embedding.sigma <= 100.0);
  CHECK(plr.embedding.d_embed >= 1);
  CHECK(plr.backbone.n_layers >= 1);
  CHECK(plr.backbone.n_layers <= 16);
  CHECK(plr.train_config.learning_rate >= 5e-5);
  CHECK(plr.train_config.learning_rate <= 0.005);

  base.model = "MLP-T-LR";
  const ExperimentConfig tlr = sample_config(base, space, rng);
  CHECK(tlr.embedding.tree.max_leaves >= 2);
  CHECK(tlr.embedding.tree.min_samples_leaf >= 1);
  CHECK(tlr.embedding.tree.min_info_gain >= 1e-9);

  base.model = "MLP-Q";
  const ExperimentConfig q = sample_config(base, space, rng);
  CHECK(q.embedding.n_bins >= 2);
  CHECK(q.embedding.n_bins <= 256);
}

TEST_CASE("sampled configs differ across draws") {
  Rng rng(5);
  SearchSpace space;
  ExperimentConfig base;
  base.model = "MLP";
  const ExperimentConfig a = sample_config(base, space, rng);
  const ExperimentConfig b = sample_config(base, space, rng);
  CHECK((a.backbone.n_layers != b.backbone.n_layers ||
         a.backbone.layer_size != b.backbone.layer_size ||
         a.train_config.learning_rate != b.train_config.learning_rate));
}

TEST_CASE("random search returns the trial with the best validation metric") {
  const Dataset ds = tiny_regression();
  ExperimentConfig base;
  base.model = "MLP";
  base.preprocess = PreprocessKind::None;
  base.train_config.max_epochs = 8;
  base.train_config.patience = 2;
  base.seeds = {0};

  SearchSpace space;
  // keep the nets tiny so the search runs fast
  space.n_layers = UniformIntDist{1, 2};
  space.layer_size = UniformIntDist{4, 16};
  space.learning_rate = LogUniformDist{1e-3, 1e-2};

  const TuneResult result = random_search_tune(ds, base, space, 4, 17);
  REQUIRE(result.trials.size() == 4);
  const double best = result.trials[result.best_index].val_metric;
  for (const auto& trial : result.trials) {
    if (!trial.failed) CHECK(best <= trial.val_metric);
  }
  // ties and the best itself: no earlier trial is strictly better
  for (std::size_t i = 0; i < result.best_index; ++i) {
    if (!result.trials[i].failed) CHECK(result.trials[i].val_metric > best);
  }
}

TEST_CASE("budget one returns that single trial") {
  const Dataset ds = tiny_regression(60);
  ExperimentConfig base;
  base.model = "MLP";
  base.preprocess = PreprocessKind::None;
  base.train_config.max_epochs = 3;
  base.train_config.patience = 1;
  base.seeds = {0};
  SearchSpace space;
  space.n_layers = ConstDist{1};
  space.layer_size = ConstDist{4};
  const TuneResult result = random_search_tune(ds, base, space, 1, 8);
  REQUIRE(result.trials.size() == 1);
  CHECK(result.best_index == 0);
}
