#pragma once

#include <iosfwd>
#include <vector>

#include "tabembed/binning.hpp"
#include "tabembed/types.hpp"

namespace tabembed {

// Piecewise linear encoding: 1 on passed bins, a linear fraction on the
// containing bin, 0 beyond. Out-of-range inputs extrapolate linearly in the
// first/last component.
Vector ple_encode(double x, const BinLayout& bins);

// Thresholded variant: component t is 1 iff x >= b_{t-1}.
Vector binary_encode(double x, const BinLayout& bins);

// Gaussian soft binning in bin-normalized coordinates. x is mapped to
// x_hat = clamp(sum(PLE(x))/T, 0, 1); component t is a Gaussian kernel with
// center (t-0.5)/T and width T^-gamma.
Vector one_blob_encode(double x, const BinLayout& bins, double gamma);

struct PeriodicCoefficients {
  Vector c;      // k trainable frequencies
  double sigma;  // initialization scale
};

// [sin(2*pi*c_1*x), ..., sin(2*pi*c_k*x), cos(...), ...]
Vector periodic_map(double x, const PeriodicCoefficients& coeffs);

// c ~ Normal(0, sigma) i.i.d.; deterministic given the generator state.
PeriodicCoefficients init_periodic(Index k, double sigma, Rng& rng);

// Mixed Fourier features over the full feature vector: [sin(2*pi*B*x),
// cos(2*pi*B*x)]. B is fixed at construction (baseline only; mixes features).
Vector mixed_fourier_features(const Vector& x, const Matrix& B);

// Precomputed per-feature encodings for one data split, one block per
// feature, rows aligned with the source matrix.
struct EncodedMatrix {
  std::vector<Matrix> blocks;  // blocks[f]: n x T_f

  Index rows() const { return blocks.empty() ? 0 : blocks.front().rows(); }

  // Row-major CSV with a header naming feature/bin, e.g. "f0_b0,f0_b1,...".
  void dump_csv(std::ostream& os) const;
};

enum class EncodeKind { Ple, Binary, OneBlob };

EncodedMatrix encode_columns(const Matrix& X, const std::vector<BinLayout>& layouts,
                             EncodeKind kind, double gamma = 1.0);

}  // namespace tabembed
