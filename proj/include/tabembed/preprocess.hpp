#pragma once

#include <vector>

#include "tabembed/types.hpp"

namespace tabembed {

// Inverse of the standard normal CDF (Wichura's AS241, double precision).
double standard_normal_inv(double p);

enum class PreprocessKind { None, Standard, Quantile };

PreprocessKind parse_preprocess_kind(const std::string& s);
std::string preprocess_kind_string(PreprocessKind kind);

// Per-feature standardization fitted on the train split. Constant features
// are passed through unchanged (with a stderr warning at fit time).
class Standardizer {
 public:
  void fit(const Matrix& X_train);
  Matrix apply(const Matrix& X) const;

  const Vector& means() const { return mean_; }
  const Vector& stds() const { return std_; }

 private:
  Vector mean_, std_;
};

// Rank-based normalization: empirical CDF through up to n_landmarks
// reference quantiles (linear interpolation), then the standard normal
// inverse CDF, clipped to +-8. Constant features fall back to identity.
class QuantileTransformer {
 public:
  // 1001 landmarks put 0.5 exactly on the reference grid, so the fitted
  // median maps to 0 rather than to an interpolated neighborhood of it.
  explicit QuantileTransformer(Index n_landmarks = 1001) : n_landmarks_(n_landmarks) {}

  void fit(const Matrix& X_train);
  Matrix apply(const Matrix& X) const;
  double apply_one(double x, Index feature) const;

 private:
  Index n_landmarks_;
  std::vector<std::vector<double>> quantiles_;      // per feature, ascending
  std::vector<std::vector<double>> neg_quantiles_;  // negated, reversed
  std::vector<double> references_;                  // shared CDF levels in [0, 1]
  std::vector<double> rev_references_;
  std::vector<bool> degenerate_;
};

// Mean/std of regression targets on the train split; predictions are mapped
// back through inverse() before computing reported metrics.
class TargetStandardizer {
 public:
  void fit(const Vector& y_train);
  Vector apply(const Vector& y) const;
  Vector inverse(const Vector& y) const;
  double mean() const { return mean_; }
  double std() const { return std_; }

 private:
  double mean_ = 0.0;
  double std_ = 1.0;
};

// Dispatcher over the three feature preprocessing policies.
class Preprocessor {
 public:
  explicit Preprocessor(PreprocessKind kind, Index n_landmarks = 1001)
      : kind_(kind), quantile_(n_landmarks) {}

  void fit(const Matrix& X_train);
  Matrix apply(const Matrix& X) const;
  PreprocessKind kind() const { return kind_; }

 private:
  PreprocessKind kind_;
  Standardizer standard_;
  QuantileTransformer quantile_;
};

}  // namespace tabembed
