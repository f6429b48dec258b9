#include "tabembed/encoding.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace tabembed {

Vector ple_encode(double x, const BinLayout& bins) {
  const Index t_count = bins.bin_count();
  const Vector& b = bins.boundaries;
  Vector e(t_count);
  for (Index t = 1; t <= t_count; ++t) {
    if (x < b[t - 1] && t > 1)
      e[t - 1] = 0.0;
    else if (x >= b[t] && t < t_count)
      e[t - 1] = 1.0;
    else
      e[t - 1] = (x - b[t - 1]) / (b[t] - b[t - 1]);
  }
  return e;
}

Vector binary_encode(double x, const BinLayout& bins) {
  const Index t_count = bins.bin_count();
  Vector e(t_count);
  for (Index t = 1; t <= t_count; ++t)
    e[t - 1] = (x >= bins.boundaries[t - 1]) ? 1.0 : 0.0;
  return e;
}

Vector one_blob_encode(double x, const BinLayout& bins, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("one_blob_encode: gamma must be > 0");
  const Index t_count = bins.bin_count();
  const double dt = static_cast<double>(t_count);
  double x_hat = ple_encode(x, bins).sum() / dt;
  x_hat = std::clamp(x_hat, 0.0, 1.0);
  const double width = std::pow(dt, -gamma);
  Vector e(t_count);
  for (Index t = 1; t <= t_count; ++t) {
    const double center = (static_cast<double>(t) - 0.5) / dt;
    const double d = x_hat - center;
    e[t - 1] = std::exp(-d * d / (2.0 * width * width));
  }
  return e;
}

Vector periodic_map(double x, const PeriodicCoefficients& coeffs) {
  const Index k = coeffs.c.size();
  Vector out(2 * k);
  for (Index j = 0; j < k; ++j) {
    const double v = 2.0 * std::numbers::pi * coeffs.c[j] * x;
    out[j] = std::sin(v);
    out[k + j] = std::cos(v);
  }
  return out;
}

PeriodicCoefficients init_periodic(Index k, double sigma, Rng& rng) {
  if (k < 1) throw std::invalid_argument("init_periodic: k must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("init_periodic: sigma must be > 0");
  std::normal_distribution<double> normal(0.0, sigma);
  PeriodicCoefficients coeffs;
  coeffs.sigma = sigma;
  coeffs.c.resize(k);
  for (Index j = 0; j < k; ++j) coeffs.c[j] = normal(rng);
  return coeffs;
}

Vector mixed_fourier_features(const Vector& x, const Matrix& B) {
  if (B.cols() != x.size())
    throw std::invalid_argument("mixed_fourier_features: dimension mismatch");
  const Vector v = 2.0 * std::numbers::pi * (B * x);
  Vector out(2 * v.size());
  out.head(v.size()) = v.array().sin();
  out.tail(v.size()) = v.array().cos();
  return out;
}

void EncodedMatrix::dump_csv(std::ostream& os) const {
  for (std::size_t f = 0; f < blocks.size(); ++f) {
    for (Index t = 0; t < blocks[f].cols(); ++t) {
      if (f != 0 || t != 0) os << ',';
      os << 'f' << f << "_b" << t;
    }
  }
  os << '\n';
  const Index n = rows();
  for (Index i = 0; i < n; ++i) {
    bool first = true;
    for (const auto& block : blocks) {
      for (Index t = 0; t < block.cols(); ++t) {
        if (!first) os << ',';
        first = false;
        os << block(i, t);
      }
    }
    os << '\n';
  }
}

EncodedMatrix encode_columns(const Matrix& X, const std::vector<BinLayout>& layouts,
                             EncodeKind kind, double gamma) {
  EncodedMatrix out;
  out.blocks.reserve(layouts.size());
  for (const auto& layout : layouts) {
    const Index f = layout.feature_index;
    Matrix block(X.rows(), layout.bin_count());
    for (Index i = 0; i < X.rows(); ++i) {
      switch (kind) {
        case EncodeKind::Ple: block.row(i) = ple_encode(X(i, f), layout); break;
        case EncodeKind::Binary: block.row(i) = binary_encode(X(i, f), layout); break;
        case EncodeKind::OneBlob: block.row(i) = one_blob_encode(X(i, f), layout, gamma); break;
      }
    }
    out.blocks.push_back(std::move(block));
  }
  return out;
}

}  // namespace tabembed
