#include "tabembed/evaluate.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace tabembed {

double rmse(const Vector& pred, const Vector& truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("rmse: length mismatch");
  return std::sqrt((pred - truth).squaredNorm() / static_cast<double>(pred.size()));
}

double accuracy(const Matrix& probabilities, const Vector& truth) {
  if (probabilities.rows() != truth.size())
    throw std::invalid_argument("accuracy: length mismatch");
  Index hits = 0;
  for (Index i = 0; i < probabilities.rows(); ++i) {
    Index argmax;
    probabilities.row(i).maxCoeff(&argmax);
    if (argmax == static_cast<Index>(truth[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(probabilities.rows());
}

double RunSet::run_metric(std::size_t i) const {
  if (task == TaskKind::Regression) return rmse(predictions[i].col(0), truth);
  return accuracy(predictions[i], truth);
}

EnsembleResult ensemble(const RunSet& runs, int n_groups) {
  const std::size_t n = runs.predictions.size();
  if (n_groups < 1 || n % static_cast<std::size_t>(n_groups) != 0)
    throw IndivisibleSeeds("ensemble: " + std::to_string(n) + " runs not divisible into " +
                           std::to_string(n_groups) + " groups");
  const std::size_t group_size = n / static_cast<std::size_t>(n_groups);

  EnsembleResult result;
  for (int g = 0; g < n_groups; ++g) {
    Matrix avg = runs.predictions[g * group_size];
    for (std::size_t i = 1; i < group_size; ++i) avg += runs.predictions[g * group_size + i];
    avg /= static_cast<double>(group_size);
    const double metric = runs.task == TaskKind::Regression ? rmse(avg.col(0), runs.truth)
                                                            : accuracy(avg, runs.truth);
    result.group_metrics.push_back(metric);
  }
  double sum = 0.0;
  for (double m : result.group_metrics) sum += m;
  result.mean = sum / static_cast<double>(n_groups);
  double sq = 0.0;
  for (double m : result.group_metrics) sq += (m - result.mean) * (m - result.mean);
  result.sd = std::sqrt(sq / static_cast<double>(n_groups));
  return result;
}

void write_metrics_table(std::ostream& os, const RunSet& runs, int n_groups) {
  os << std::setprecision(10);
  const char* metric_name = runs.task == TaskKind::Regression ? "rmse" : "accuracy";
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < runs.predictions.size(); ++i) {
    const double m = runs.run_metric(i);
    os << "seed " << runs.seeds[i] << ' ' << metric_name << ' ' << m << '\n';
    sum += m;
  }
  const double n = static_cast<double>(runs.predictions.size());
  const double mean = sum / n;
  for (std::size_t i = 0; i < runs.predictions.size(); ++i) {
    const double m = runs.run_metric(i);
    sq += (m - mean) * (m - mean);
  }
  os << "single mean " << mean << " sd " << std::sqrt(sq / n) << '\n';

  if (runs.predictions.size() % static_cast<std::size_t>(n_groups) == 0) {
    const EnsembleResult e = ensemble(runs, n_groups);
    for (std::size_t g = 0; g < e.group_metrics.size(); ++g)
      os << "ensemble group " << g << ' ' << metric_name << ' ' << e.group_metrics[g] << '\n';
    os << "ensemble mean " << e.mean << " sd " << e.sd << '\n';
  }
}

}  // namespace tabembed
