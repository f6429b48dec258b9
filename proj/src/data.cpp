#include "tabembed/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace tabembed {

Index Dataset::n_classes() const {
  if (task == TaskKind::Regression) return 0;
  Index k = 0;
  for (Index i = 0; i < labels.size(); ++i)
    k = std::max(k, static_cast<Index>(labels[i]) + 1);
  return k;
}

Index Dataset::onehot_width() const {
  return std::accumulate(cat_cardinality.begin(), cat_cardinality.end(), Index{0});
}

Matrix Dataset::onehot_rows(const std::vector<Index>& rows) const {
  Matrix out = Matrix::Zero(static_cast<Index>(rows.size()), onehot_width());
  Index off = 0;
  for (std::size_t c = 0; c < cat_codes.size(); ++c) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Index code = cat_codes[c][rows[i]];
      if (code >= 0 && code < cat_cardinality[c])
        out(static_cast<Index>(i), off + code) = 1.0;
    }
    off += cat_cardinality[c];
  }
  return out;
}

Matrix Dataset::num_rows(const std::vector<Index>& rows) const {
  Matrix out(static_cast<Index>(rows.size()), n_num());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Index>(i)) = num_features.row(rows[i]);
  return out;
}

Vector Dataset::label_rows(const std::vector<Index>& rows) const {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Index>(i)] = labels[rows[i]];
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

CsvSchema load_schema(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw SchemaMismatch("cannot open schema file: " + path);
  CsvSchema schema;
  std::string key, value;
  while (is >> key >> value) {
    if (key == "task") {
      if (value == "binclass") schema.task = TaskKind::Binclass;
      else if (value == "multiclass") schema.task = TaskKind::Multiclass;
      else if (value == "regression") schema.task = TaskKind::Regression;
      else throw SchemaMismatch("unknown task kind: " + value);
    } else if (value == "numerical") {
      schema.roles.push_back(ColumnRole::Numerical);
    } else if (value == "categorical") {
      schema.roles.push_back(ColumnRole::Categorical);
    } else if (value == "target") {
      schema.roles.push_back(ColumnRole::Target);
    } else {
      throw SchemaMismatch("unknown column role '" + value + "' for column " + key);
    }
  }
  return schema;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open CSV file: " + path);

  std::string line;
  if (!std::getline(is, line)) throw SchemaMismatch("empty CSV file: " + path);
  const auto header = split_line(line);
  if (header.size() != schema.roles.size())
    throw SchemaMismatch("schema has " + std::to_string(schema.roles.size()) +
                         " columns but CSV header has " + std::to_string(header.size()));
  const Index n_target =
      std::count(schema.roles.begin(), schema.roles.end(), ColumnRole::Target);
  if (n_target != 1) throw SchemaMismatch("schema must mark exactly one target column");

  std::vector<std::vector<double>> num_cols_data;
  std::vector<std::size_t> num_cols, cat_cols;
  std::size_t target_col = 0;
  for (std::size_t c = 0; c < schema.roles.size(); ++c) {
    if (schema.roles[c] == ColumnRole::Numerical) num_cols.push_back(c);
    else if (schema.roles[c] == ColumnRole::Categorical) cat_cols.push_back(c);
    else target_col = c;
  }

  Dataset ds;
  ds.task = schema.task;
  ds.cat_codes.resize(cat_cols.size());
  std::vector<std::map<std::string, Index>> cat_vocab(cat_cols.size());
  std::map<std::string, Index> label_vocab;
  std::vector<double> labels;
  num_cols_data.resize(num_cols.size());

  Index row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != schema.roles.size())
      throw ParseError("wrong cell count", row, static_cast<Index>(cells.size()));

    for (std::size_t i = 0; i < num_cols.size(); ++i) {
      double v;
      if (!parse_double(cells[num_cols[i]], v))
        throw ParseError("unparseable numerical cell '" + cells[num_cols[i]] + "'", row,
                         static_cast<Index>(num_cols[i]));
      num_cols_data[i].push_back(v);
    }
    for (std::size_t i = 0; i < cat_cols.size(); ++i) {
      const std::string& v = cells[cat_cols[i]];
      auto [it, inserted] = cat_vocab[i].try_emplace(v, static_cast<Index>(cat_vocab[i].size()));
      ds.cat_codes[i].push_back(it->second);
    }
    const std::string& t = cells[target_col];
    if (t.empty())
      throw ParseError("missing target cell", row, static_cast<Index>(target_col));
    if (ds.task == TaskKind::Regression) {
      double v;
      if (!parse_double(t, v))
        throw ParseError("unparseable target '" + t + "'", row, static_cast<Index>(target_col));
      labels.push_back(v);
    } else {
      auto [it, inserted] = label_vocab.try_emplace(t, static_cast<Index>(label_vocab.size()));
      labels.push_back(static_cast<double>(it->second));
    }
    ++row;
  }

  ds.num_features.resize(row, static_cast<Index>(num_cols.size()));
  for (std::size_t c = 0; c < num_cols.size(); ++c)
    for (Index i = 0; i < row; ++i) ds.num_features(i, static_cast<Index>(c)) = num_cols_data[c][i];
  ds.labels = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
  for (std::size_t i = 0; i < cat_cols.size(); ++i)
    ds.cat_cardinality.push_back(static_cast<Index>(cat_vocab[i].size()));
  return ds;
}

void split(Dataset& dataset, double train_frac, double val_frac, double test_frac,
           std::uint64_t seed) {
  const double total = train_frac + val_frac + test_frac;
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("split: fractions must sum to 1");
  const Index n = dataset.n_rows();

  // ceil on the held-out parts, train takes the remainder (this reproduces
  // the usual two-stage holdout sizes).
  const auto n_test = static_cast<Index>(std::ceil(test_frac * static_cast<double>(n) - 1e-9));
  const auto n_val = static_cast<Index>(std::ceil(val_frac * static_cast<double>(n) - 1e-9));
  const Index n_train = n - n_val - n_test;
  if (n_train <= 0 || n_val <= 0 || n_test <= 0)
    throw EmptySplit("split: a split would receive 0 rows (n=" + std::to_string(n) + ")");

  Rng rng(seed);
  Splits s;
  if (dataset.task == TaskKind::Regression) {
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    s.test.assign(order.begin(), order.begin() + n_test);
    s.val.assign(order.begin() + n_test, order.begin() + n_test + n_val);
    s.train.assign(order.begin() + n_test + n_val, order.end());
  } else {
    // Stratified: per-class pools, global split sizes distributed across
    // classes by largest remainder.
    const Index k = dataset.n_classes();
    std::vector<std::vector<Index>> pools(k);
    for (Index i = 0; i < n; ++i) pools[static_cast<Index>(dataset.labels[i])].push_back(i);
    for (auto& pool : pools) std::shuffle(pool.begin(), pool.end(), rng);

    auto allocate = [&](Index want) {
      std::vector<Index> counts(k);
      std::vector<std::pair<double, Index>> rema(k);
      Index assigned = 0;
      for (Index c = 0; c < k; ++c) {
        const double exact = static_cast<double>(want) *
                             static_cast<double>(pools[c].size()) / static_cast<double>(n);
        counts[c] = static_cast<Index>(std::floor(exact));
        assigned += counts[c];
        rema[c] = {exact - std::floor(exact), c};
      }
      std::stable_sort(rema.begin(), rema.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      for (Index i = 0; assigned < want; ++i, ++assigned) counts[rema[i % k].second]++;
      return counts;
    };

    const auto test_counts = allocate(n_test);
    const auto val_counts = allocate(n_val);
    for (Index c = 0; c < k; ++c) {
      const auto& pool = pools[c];
      const Index t = test_counts[c], v = val_counts[c];
      if (t + v > static_cast<Index>(pool.size()))
        throw EmptySplit("split: class " + std::to_string(c) + " too small to stratify");
      s.test.insert(s.test.end(), pool.begin(), pool.begin() + t);
      s.val.insert(s.val.end(), pool.begin() + t, pool.begin() + t + v);
      s.train.insert(s.train.end(), pool.begin() + t + v, pool.end());
    }
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  dataset.splits = std::move(s);
}

namespace {

// Chain-shaped decision tree of the given depth: one comparison per level,
// all on the same feature. The first threshold that exceeds x decides the
// leaf; passing every comparison reaches the final leaf. Keeping each tree
// univariate makes the target additive across features, which keeps the
// benchmark learnable at the default sample size while staying exactly
// piecewise constant along axis-aligned cells.
struct RandomTree {
  Index feature = 0;
  std::vector<double> threshold;   // one per level
  std::vector<double> leaf_value;  // depth + 1 leaves

  double eval(const double* x) const {
    const double v = x[feature];
    for (std::size_t k = 0; k < threshold.size(); ++k)
      if (v < threshold[k]) return leaf_value[k];
    return leaf_value[threshold.size()];
  }
};

}  // namespace

Dataset synth_gbdt(const SynthConfig& config) {
  if (config.n < 1 || config.m < 1 || config.n_trees < 1)
    throw std::invalid_argument("synth_gbdt: parameters must be positive");
  if (config.depth < 1)
    throw DegenerateFeature("synth_gbdt: depth 0 trees are constant; the target would be degenerate");

  Rng rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<Index> feat(0, config.m - 1);

  Dataset ds;
  ds.task = TaskKind::Regression;
  ds.num_features.resize(config.n, config.m);
  for (Index i = 0; i < config.n; ++i)
    for (Index f = 0; f < config.m; ++f) ds.num_features(i, f) = normal(rng);

  std::vector<RandomTree> trees(config.n_trees);
  for (auto& tree : trees) {
    tree.feature = feat(rng);
    tree.threshold.resize(static_cast<std::size_t>(config.depth));
    tree.leaf_value.resize(static_cast<std::size_t>(config.depth) + 1);
    for (auto& v : tree.threshold) v = normal(rng);
    for (auto& v : tree.leaf_value) v = normal(rng);
  }

  ds.labels.resize(config.n);
  std::vector<double> xrow(config.m);
  for (Index i = 0; i < config.n; ++i) {
    for (Index f = 0; f < config.m; ++f) xrow[f] = ds.num_features(i, f);
    double sum = 0.0;
    for (const auto& tree : trees) sum += tree.eval(xrow.data());
    ds.labels[i] = sum / static_cast<double>(config.n_trees);
  }

  const double mean = ds.labels.mean();
  const double sd = std::sqrt((ds.labels.array() - mean).square().sum() /
                              static_cast<double>(config.n));
  if (sd <= 0.0) throw DegenerateFeature("synth_gbdt: constant target");
  ds.labels = (ds.labels.array() - mean) / sd;

  split(ds, 0.64, 0.16, 0.20, config.seed);
  return ds;
}

void save_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.precision(17);
  for (Index f = 0; f < dataset.n_num(); ++f) os << 'x' << f << ',';
  os << "y\n";
  for (Index i = 0; i < dataset.n_rows(); ++i) {
    for (Index f = 0; f < dataset.n_num(); ++f) os << dataset.num_features(i, f) << ',';
    os << dataset.labels[i] << '\n';
  }
}

}  // namespace tabembed
