// Command-line driver: dataset preparation, training, tuning, bin sweeps
// and report rendering on top of the tabembed library.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tabembed/experiment.hpp"
#include "tabembed/tune.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tabembed;

namespace {

struct NoRunsFound : std::runtime_error {
  explicit NoRunsFound(const std::string& dir)
      : std::runtime_error("no runs found under " + dir) {}
};

// Atomic write: temp file in the same directory, then rename.
void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
  }
  fs::rename(tmp, path);
}

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::string dataset_csv;
  std::string dataset_schema;
  std::string model;
  int seed_count = -1;
  Index bins = -1;
  double sigma = -1.0;
  int budget = 20;
  std::vector<Index> bin_list;
};

struct FullConfig {
  ExperimentConfig experiment;
  SynthConfig synth;
  bool use_synth = true;
  std::string csv_path, schema_path;
  std::string out_dir = "runs/experiment";
};

FullConfig load_config(const CliOptions& opts) {
  FullConfig cfg;
  json j;
  if (!opts.config_path.empty()) {
    std::ifstream is(opts.config_path);
    if (!is) throw std::runtime_error("cannot open config: " + opts.config_path);
    j = json::parse(is);
  }

  try {
    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      if (d.contains("csv")) {
        cfg.use_synth = false;
        cfg.csv_path = d["csv"].get<std::string>();
        cfg.schema_path = d.value("schema", cfg.csv_path + ".schema");
      } else if (d.contains("synth")) {
        const auto& s = d["synth"];
        cfg.synth.n = s.value("n", cfg.synth.n);
        cfg.synth.m = s.value("m", cfg.synth.m);
        cfg.synth.n_trees = s.value("n_trees", cfg.synth.n_trees);
        cfg.synth.depth = s.value("depth", cfg.synth.depth);
        cfg.synth.seed = s.value("seed", cfg.synth.seed);
      }
    }
    auto& e = cfg.experiment;
    e.model = j.value("model", e.model);
    if (j.contains("preprocess"))
      e.preprocess = parse_preprocess_kind(j["preprocess"].get<std::string>());
    if (j.contains("backbone")) {
      const auto& b = j["backbone"];
      e.backbone.n_layers = b.value("n_layers", e.backbone.n_layers);
      e.backbone.layer_size = b.value("layer_size", e.backbone.layer_size);
      e.backbone.dropout = b.value("dropout", e.backbone.dropout);
    }
    if (j.contains("embedding")) {
      const auto& m = j["embedding"];
      e.embedding.d_embed = m.value("d_embed", e.embedding.d_embed);
      e.embedding.n_bins = m.value("n_bins", e.embedding.n_bins);
      e.embedding.k = m.value("k", e.embedding.k);
      e.embedding.sigma = m.value("sigma", e.embedding.sigma);
      e.embedding.autodis_meta = m.value("autodis_meta", e.embedding.autodis_meta);
      e.embedding.autodis_temp = m.value("autodis_temp", e.embedding.autodis_temp);
      e.embedding.gamma = m.value("gamma", e.embedding.gamma);
      if (m.contains("tree")) {
        const auto& t = m["tree"];
        e.embedding.tree.max_leaves = t.value("max_leaves", e.embedding.tree.max_leaves);
        e.embedding.tree.min_samples_leaf =
            t.value("min_samples_leaf", e.embedding.tree.min_samples_leaf);
        e.embedding.tree.min_info_gain =
            t.value("min_info_gain", e.embedding.tree.min_info_gain);
      }
      const std::string enc = m.value("encode", std::string("ple"));
      if (enc == "ple") e.embedding.encode_kind = EncodeKind::Ple;
      else if (enc == "binary") e.embedding.encode_kind = EncodeKind::Binary;
      else if (enc == "one-blob") e.embedding.encode_kind = EncodeKind::OneBlob;
      else throw std::runtime_error("embedding.encode must be ple|binary|one-blob");
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      e.train_config.learning_rate = t.value("learning_rate", e.train_config.learning_rate);
      e.train_config.weight_decay = t.value("weight_decay", e.train_config.weight_decay);
      e.train_config.batch_size = t.value("batch_size", e.train_config.batch_size);
      e.train_config.patience = t.value("patience", e.train_config.patience);
      e.train_config.max_epochs = t.value("max_epochs", e.train_config.max_epochs);
    }
    if (j.contains("seeds")) e.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    cfg.out_dir = j.value("out", cfg.out_dir);
  } catch (const json::exception& ex) {
    throw std::runtime_error(std::string("config parse error: ") + ex.what());
  }

  // Flag overrides.
  if (!opts.dataset_csv.empty()) {
    cfg.use_synth = false;
    cfg.csv_path = opts.dataset_csv;
    if (!opts.dataset_schema.empty()) cfg.schema_path = opts.dataset_schema;
    else if (cfg.schema_path.empty()) cfg.schema_path = cfg.csv_path + ".schema";
  }
  if (!opts.model.empty()) cfg.experiment.model = opts.model;
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.seed_count > 0) {
    cfg.experiment.seeds.clear();
    for (int s = 0; s < opts.seed_count; ++s) cfg.experiment.seeds.push_back(s);
  }
  if (opts.bins > 0) cfg.experiment.embedding.n_bins = opts.bins;
  if (opts.sigma > 0.0) cfg.experiment.embedding.sigma = opts.sigma;

  parse_model_name(cfg.experiment.model);  // fail fast with the valid-name list
  return cfg;
}

Dataset load_dataset(const FullConfig& cfg) {
  if (cfg.use_synth) return synth_gbdt(cfg.synth);
  Dataset ds = load_csv(cfg.csv_path, load_schema(cfg.schema_path));
  split(ds, 0.64, 0.16, 0.20, cfg.synth.seed);
  return ds;
}

int cmd_train(const CliOptions& opts) {
  const FullConfig cfg = load_config(opts);
  const Dataset ds = load_dataset(cfg);
  const ExperimentRun run = run_experiment(ds, cfg.experiment);

  const fs::path out(cfg.out_dir);
  {
    std::ostringstream ss;
    save_bin_layouts(ss, [&] {
      std::vector<BinLayout> layouts;
      for (const auto& s : run.specs)
        if (s.bins) layouts.push_back(*s.bins);
      return layouts;
    }());
    write_file(out / "bins.txt", ss.str());
  }

  bool any_failed = false;
  for (std::size_t i = 0; i < cfg.experiment.seeds.size(); ++i) {
    const auto seed = cfg.experiment.seeds[i];
    std::ostringstream ss;
    run.reports[i].save(ss);
    write_file(out / ("seed_" + std::to_string(seed)) / "report.json", ss.str());
    if (run.reports[i].failed) {
      any_failed = true;
      std::cerr << "seed " << seed << " failed: " << run.reports[i].failure << '\n';
      continue;
    }
    Matrix pred;
    std::unique_ptr<Model> model;
    run_seed(run.specs, run.data, cfg.experiment, seed, &pred, &model);
    std::ostringstream ck;
    model->save(ck);
    write_file(out / ("seed_" + std::to_string(seed)) / "checkpoint.json", ck.str());
  }

  std::ostringstream summary;
  write_metrics_table(summary, run.runs);
  write_file(out / "summary", summary.str());
  std::cout << summary.str();
  return any_failed ? 1 : 0;
}

int cmd_synth(const CliOptions& opts) {
  const FullConfig cfg = load_config(opts);
  const Dataset ds = synth_gbdt(cfg.synth);
  const fs::path out = cfg.out_dir.empty() ? "synth.csv" : cfg.out_dir;
  fs::create_directories(out.parent_path().empty() ? "." : out.parent_path());
  save_csv(ds, out.string());
  std::cout << "wrote " << ds.n_rows() << " rows to " << out.string() << '\n';
  return 0;
}

int cmd_sweep_bins(const CliOptions& opts) {
  const FullConfig cfg = load_config(opts);
  if (opts.bin_list.empty())
    throw CLI::ValidationError("--bins-list", "sweep-bins requires a non-empty bin count list");
  for (Index bins : opts.bin_list)
    if (bins < 1)
      throw CLI::ValidationError("--bins-list", "bin counts must be positive integers");
  const ModelName name = parse_model_name(cfg.experiment.model);
  if (!embedding_uses_bins(name.embedding))
    throw CLI::ValidationError("--model", "sweep-bins requires a PLE-based model (Q-*/T-*)");

  const Dataset ds = load_dataset(cfg);
  std::ostringstream csv;
  csv << "bin_count,mean_rmse,sd\n";
  for (Index bins : opts.bin_list) {
    ExperimentConfig e = cfg.experiment;
    e.embedding.n_bins = bins;
    e.embedding.tree.max_leaves = std::max<Index>(bins, 2);
    const ExperimentRun run = run_experiment(ds, e);
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < run.runs.predictions.size(); ++i) sum += run.runs.run_metric(i);
    const double n = static_cast<double>(run.runs.predictions.size());
    const double mean = sum / n;
    for (std::size_t i = 0; i < run.runs.predictions.size(); ++i) {
      const double m = run.runs.run_metric(i);
      sq += (m - mean) * (m - mean);
    }
    csv << bins << ',' << mean << ',' << std::sqrt(sq / n) << '\n';
    std::cout << "bins " << bins << ": mean " << mean << " sd " << std::sqrt(sq / n) << '\n';
  }
  write_file(fs::path(cfg.out_dir) / "sweep.csv", csv.str());
  return 0;
}

int cmd_tune(const CliOptions& opts) {
  const FullConfig cfg = load_config(opts);
  const Dataset ds = load_dataset(cfg);
  const SearchSpace space;
  const std::uint64_t seed = cfg.experiment.seeds.empty() ? 0 : cfg.experiment.seeds.front();
  const TuneResult result = random_search_tune(ds, cfg.experiment, space, opts.budget, seed);

  json j;
  j["budget"] = opts.budget;
  j["best_index"] = result.best_index;
  json trials = json::array();
  for (const auto& t : result.trials) {
    trials.push_back({{"val_metric", t.val_metric},
                      {"failed", t.failed},
                      {"train_seconds", t.train_seconds},
                      {"model", t.config.model},
                      {"n_layers", t.config.backbone.n_layers},
                      {"layer_size", t.config.backbone.layer_size},
                      {"dropout", t.config.backbone.dropout},
                      {"learning_rate", t.config.train_config.learning_rate},
                      {"weight_decay", t.config.train_config.weight_decay},
                      {"d_embed", t.config.embedding.d_embed},
                      {"n_bins", t.config.embedding.n_bins},
                      {"k", t.config.embedding.k},
                      {"sigma", t.config.embedding.sigma}});
  }
  j["trials"] = std::move(trials);
  write_file(fs::path(cfg.out_dir) / "tuning.json", j.dump(2) + "\n");
  std::cout << "best trial " << result.best_index << " val metric "
            << result.trials[result.best_index].val_metric << '\n';
  return 0;
}

int cmd_report(const std::string& dir) {
  if (!fs::exists(dir)) throw NoRunsFound(dir);
  bool any = false;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.path().filename() == "summary" || entry.path().filename() == "sweep.csv" ||
        entry.path().filename() == "tuning.json") {
      std::cout << "=== " << entry.path().string() << " ===\n";
      std::ifstream is(entry.path());
      std::cout << is.rdbuf() << '\n';
      any = true;
    }
  }
  if (!any) throw NoRunsFound(dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical-feature embedding experiments for tabular deep learning"};
  app.require_subcommand(1);
  CliOptions opts;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config_path, "JSON experiment config");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--dataset", opts.dataset_csv, "CSV dataset path");
    cmd->add_option("--schema", opts.dataset_schema, "schema sidecar path");
    cmd->add_option("--model", opts.model, "model name, Backbone-Embedding grammar");
    cmd->add_option("--seed-count", opts.seed_count, "number of seeds (0..n-1)");
    cmd->add_option("--bins", opts.bins, "quantile bin count");
    cmd->add_option("--sigma", opts.sigma, "periodic embedding sigma");
  };

  auto* train_cmd = app.add_subcommand("train", "train one model over the seed list");
  add_common(train_cmd);
  auto* tune_cmd = app.add_subcommand("tune", "random-search hyperparameter tuning");
  add_common(tune_cmd);
  tune_cmd->add_option("--budget", opts.budget, "number of sampled configs");
  auto* sweep_cmd = app.add_subcommand("sweep-bins", "train across a list of bin counts");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--bins-list", opts.bin_list, "bin counts to sweep")->delimiter(',');
  auto* synth_cmd = app.add_subcommand("synth", "generate the synthetic dataset as CSV");
  add_common(synth_cmd);
  auto* report_cmd = app.add_subcommand("report", "render summaries under a directory");
  std::string report_dir;
  report_cmd->add_option("dir", report_dir, "experiment output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return cmd_train(opts);
    if (tune_cmd->parsed()) return cmd_tune(opts);
    if (sweep_cmd->parsed()) return cmd_sweep_bins(opts);
    if (synth_cmd->parsed()) return cmd_synth(opts);
    if (report_cmd->parsed()) return cmd_report(report_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
