#include "tabembed/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

namespace tabembed {

// Wichura (1988), algorithm AS241 PPND16.
double standard_normal_inv(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }

  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -value : value;
}

PreprocessKind parse_preprocess_kind(const std::string& s) {
  if (s == "none") return PreprocessKind::None;
  if (s == "standard") return PreprocessKind::Standard;
  if (s == "quantile") return PreprocessKind::Quantile;
  throw std::invalid_argument("unknown preprocessing '" + s + "'; use none|standard|quantile");
}

std::string preprocess_kind_string(PreprocessKind kind) {
  switch (kind) {
    case PreprocessKind::None: return "none";
    case PreprocessKind::Standard: return "standard";
    case PreprocessKind::Quantile: return "quantile";
  }
  return "?";
}

void Standardizer::fit(const Matrix& X_train) {
  const double n = static_cast<double>(X_train.rows());
  mean_ = X_train.colwise().mean();
  std_.resize(X_train.cols());
  for (Index f = 0; f < X_train.cols(); ++f) {
    const double var = (X_train.col(f).array() - mean_[f]).square().sum() / n;
    std_[f] = std::sqrt(var);
    if (std_[f] <= 0.0) {
      std::cerr << "warning: feature " << f << " is constant; standardization is a no-op\n";
      mean_[f] = 0.0;
      std_[f] = 1.0;
    }
  }
}

Matrix Standardizer::apply(const Matrix& X) const {
  return (X.rowwise() - mean_.transpose()).array().rowwise() /
         std_.transpose().array();
}

namespace {

// np.interp semantics over ascending xs (duplicates allowed): x at a plateau
// maps through the last segment whose left end is <= x.
double interp(double x, const std::vector<double>& xs, const std::vector<double>& ys) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - xs.begin());
  const std::size_t i = j - 1;
  const double span = xs[j] - xs[i];
  if (span <= 0.0) return ys[i];
  return ys[i] + (ys[j] - ys[i]) * (x - xs[i]) / span;
}

}  // namespace

void QuantileTransformer::fit(const Matrix& X_train) {
  const Index n = X_train.rows();
  const Index landmarks = std::min<Index>(n_landmarks_, n);
  references_.resize(landmarks);
  for (Index i = 0; i < landmarks; ++i)
    references_[i] =
        landmarks == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(landmarks - 1);

  rev_references_.assign(references_.rbegin(), references_.rend());
  for (double& v : rev_references_) v = 1.0 - v;

  quantiles_.assign(X_train.cols(), {});
  neg_quantiles_.assign(X_train.cols(), {});
  degenerate_.assign(X_train.cols(), false);
  for (Index f = 0; f < X_train.cols(); ++f) {
    std::vector<double> sorted(X_train.col(f).data(), X_train.col(f).data() + n);
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() >= sorted.back()) {
      std::cerr << "warning: feature " << f << " is constant; quantile transform is identity\n";
      degenerate_[f] = true;
      continue;
    }
    auto& q = quantiles_[f];
    q.resize(landmarks);
    for (Index i = 0; i < landmarks; ++i) {
      const double pos = references_[i] * static_cast<double>(n - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      q[i] = (lo + 1 >= static_cast<std::size_t>(n))
                 ? sorted.back()
                 : sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
    }
    auto& nq = neg_quantiles_[f];
    nq.assign(q.rbegin(), q.rend());
    for (double& v : nq) v = -v;
  }
}

double QuantileTransformer::apply_one(double x, Index feature) const {
  if (degenerate_[feature]) return x;
  const auto& q = quantiles_[feature];
  // Forward/backward interpolation averaged so plateaus of duplicate
  // quantiles map to their middle reference.
  const double fwd = interp(x, q, references_);
  const double bwd = 1.0 - interp(-x, neg_quantiles_[feature], rev_references_);
  const double u = 0.5 * (fwd + bwd);
  return std::clamp(standard_normal_inv(u), -8.0, 8.0);
}

Matrix QuantileTransformer::apply(const Matrix& X) const {
  Matrix out(X.rows(), X.cols());
  for (Index f = 0; f < X.cols(); ++f)
    for (Index i = 0; i < X.rows(); ++i) out(i, f) = apply_one(X(i, f), f);
  return out;
}

void TargetStandardizer::fit(const Vector& y_train) {
  const double n = static_cast<double>(y_train.size());
  mean_ = y_train.mean();
  std_ = std::sqrt((y_train.array() - mean_).square().sum() / n);
  if (std_ <= 0.0) {
    std::cerr << "warning: constant regression target; standardization is a no-op\n";
    mean_ = 0.0;
    std_ = 1.0;
  }
}

Vector TargetStandardizer::apply(const Vector& y) const {
  return (y.array() - mean_) / std_;
}

Vector TargetStandardizer::inverse(const Vector& y) const {
  return y.array() * std_ + mean_;
}

void Preprocessor::fit(const Matrix& X_train) {
  switch (kind_) {
    case PreprocessKind::None: break;
    case PreprocessKind::Standard: standard_.fit(X_train); break;
    case PreprocessKind::Quantile: quantile_.fit(X_train); break;
  }
}

Matrix Preprocessor::apply(const Matrix& X) const {
  switch (kind_) {
    case PreprocessKind::None: return X;
    case PreprocessKind::Standard: return standard_.apply(X);
    case PreprocessKind::Quantile: return quantile_.apply(X);
  }
  return X;
}

}  // namespace tabembed
