#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tabembed/binning.hpp"
#include "tabembed/encoding.hpp"
#include "tabembed/types.hpp"

namespace tabembed {

struct ParamRef {
  Matrix* value;
  Matrix* grad;
};

// Batch-first differentiable layer. backward() returns the gradient w.r.t.
// the forward input and accumulates parameter gradients.
class Module {
 public:
  virtual ~Module() = default;
  virtual Matrix forward(const Matrix& x, bool train) = 0;
  virtual Matrix backward(const Matrix& dy) = 0;
  virtual void collect_params(std::vector<ParamRef>& out) { (void)out; }
  virtual Index out_width(Index in_width) const = 0;
};

class Linear : public Module {
 public:
  Linear(Index in, Index out, bool with_bias, Rng& rng);

  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;
  void collect_params(std::vector<ParamRef>& out) override;
  Index out_width(Index) const override { return weight.cols(); }

  Matrix weight;  // in x out
  Matrix bias;    // 1 x out (empty when bias-free)
  Matrix grad_weight;
  Matrix grad_bias;

 private:
  Matrix input_;
  bool has_input_ = false;
};

class ReLU : public Module {
 public:
  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;
  Index out_width(Index in) const override { return in; }

 private:
  Matrix input_;
  bool has_input_ = false;
};

class LeakyReLU : public Module {
 public:
  explicit LeakyReLU(double slope = 0.01) : slope_(slope) {}
  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;
  Index out_width(Index in) const override { return in; }

 private:
  double slope_;
  Matrix input_;
  bool has_input_ = false;
};

// Row-wise softmax of x / temperature.
class Softmax : public Module {
 public:
  explicit Softmax(double temperature = 1.0) : temperature_(temperature) {}
  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;
  Index out_width(Index in) const override { return in; }

 private:
  double temperature_;
  Matrix output_;
  bool has_output_ = false;
};

// Inverted dropout: scales by 1/(1-rate) at train time, identity at eval.
class Dropout : public Module {
 public:
  Dropout(double rate, Rng* rng) : rate_(rate), rng_(rng) {}
  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;
  Index out_width(Index in) const override { return in; }

 private:
  double rate_;
  Rng* rng_;
  Matrix mask_;
  bool train_mask_ = false;
};

// Per-feature periodic map with trainable frequencies; input batch x 1,
// output batch x 2k.
class Periodic : public Module {
 public:
  Periodic(Index k, double sigma, Rng& rng);
  explicit Periodic(Vector frequencies);

  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;
  void collect_params(std::vector<ParamRef>& out) override;
  Index out_width(Index) const override { return 2 * freq.rows(); }

  Matrix freq;  // k x 1
  Matrix grad_freq;

 private:
  Matrix input_;
  Matrix sin_, cos_;
  bool has_input_ = false;
};

// Fixed (non-trainable) feature-mixing Fourier map: [sin(2*pi*X*B^T),
// cos(2*pi*X*B^T)]. Baseline only.
class MixedFourier : public Module {
 public:
  explicit MixedFourier(Matrix B) : B_(std::move(B)) {}
  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;
  Index out_width(Index) const override { return 2 * B_.rows(); }

  const Matrix& mixing() const { return B_; }

 private:
  Matrix B_;
  Matrix sin_, cos_;
  bool has_input_ = false;
};

class Sequential : public Module {
 public:
  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;
  void collect_params(std::vector<ParamRef>& out) override;
  Index out_width(Index in) const override;

  void add(std::unique_ptr<Module> m) { modules_.push_back(std::move(m)); }
  std::size_t size() const { return modules_.size(); }
  Module& at(std::size_t i) { return *modules_[i]; }

 private:
  std::vector<std::unique_ptr<Module>> modules_;
};

// --- Embedding specs (Table-2 style grammar) ---------------------------------

enum class EmbeddingName {
  Raw,  // no embedding; the scalar is passed through
  L, LR, LRLR,
  Q, QL, QLR, QLRLR,
  T, TL, TLR, TLRLR,
  P, PL, PLR, PLRLR,
  AutoDis,
};

bool embedding_uses_bins(EmbeddingName name);
bool embedding_uses_periodic(EmbeddingName name);

// Parses e.g. "Q-LR", "PLR", "AutoDis"; throws InconsistentSpec on unknown
// names and lists the valid ones.
EmbeddingName parse_embedding_name(const std::string& s);
std::string embedding_name_string(EmbeddingName name);

struct EmbeddingSpec {
  EmbeddingName name = EmbeddingName::Raw;
  Index d_embed = 8;                // output width of each linear stage
  Index k = 8;                      // periodic frequency count
  double sigma = 0.1;               // periodic init scale
  std::optional<BinLayout> bins;    // required for Q-*/T-* specs
  Index autodis_meta = 16;
  double autodis_temp = 1.0;
  EncodeKind encode_kind = EncodeKind::Ple;  // ablation switch for Q/T specs
  double gamma = 1.0;                        // one-blob width exponent

  // Width of the vector this spec feeds to the backbone.
  Index output_width() const;
  // Width of the precomputed encoding it consumes (0 when none).
  Index encoding_width() const;
  void validate() const;  // throws InconsistentSpec
};

struct MLPConfig {
  Index n_layers = 2;
  Index layer_size = 64;
  double dropout = 0.0;
};

struct Batch {
  Matrix x_num;                  // batch x n_num (preprocessed scalars)
  std::vector<Matrix> encodings; // per feature; empty matrix where unused
  Matrix x_cat_onehot;           // batch x onehot width (may be 0 cols)
};

// Per-feature embedding modules (parameters never shared across features)
// plus an MLP backbone over the concatenation, per-feature one-hot
// categorical block appended raw.
class Model {
 public:
  Model(std::vector<EmbeddingSpec> specs, MLPConfig backbone, Index n_num,
        Index n_cat_onehot, Index n_outputs, std::uint64_t seed);

  Matrix forward(const Batch& batch, bool train);
  void backward(const Matrix& dloss);

  std::vector<ParamRef> params();
  std::int64_t param_count();
  void zero_grad();

  std::vector<Matrix> snapshot_params();
  void restore_params(const std::vector<Matrix>& snapshot);

  const std::vector<EmbeddingSpec>& specs() const { return specs_; }
  const MLPConfig& backbone_config() const { return backbone_config_; }
  Index n_num() const { return n_num_; }
  Index n_cat_onehot() const { return n_cat_onehot_; }
  Index n_outputs() const { return n_outputs_; }
  Sequential& embedding(Index feature) { return *embeddings_[feature]; }
  Sequential& backbone() { return backbone_; }

  void save(std::ostream& os) const;
  static Model load(std::istream& is);

 private:
  std::vector<EmbeddingSpec> specs_;
  MLPConfig backbone_config_;
  Index n_num_;
  Index n_cat_onehot_;
  Index n_outputs_;
  std::uint64_t seed_;
  std::vector<std::unique_ptr<Sequential>> embeddings_;
  Sequential backbone_;
  Rng dropout_rng_;

  std::vector<Index> widths_;  // concat width per feature
  Matrix concat_;              // cached for backward
  bool has_forward_ = false;
};

// Eq.-5 style aggregation: v_0 + sum_t e_t * v_t, with embeddings V (T x d)
// and bias v_0 (d). Equals Linear(PLE(x)).
Vector linear_ple_embed(double x, const BinLayout& bins, const Vector& v0,
                        const Matrix& V);

// Direct formula evaluation of the AutoDis module:
//   Linear(w3,b3) . softmax(./temp) . LinearNoBias(w2) . LeakyReLU . LinearNoBias(w1)
Vector autodis_embed(double x, const Matrix& w1, const Matrix& w2, const Matrix& w3,
                     const Vector& b3, double temperature, double slope = 0.01);

// --- losses ------------------------------------------------------------------

// Mean cross entropy over the batch from raw logits; grad is d(loss)/d(logits).
double softmax_cross_entropy(const Matrix& logits, const std::vector<Index>& labels,
                             Matrix& grad);
// Mean squared error; predictions and targets are batch x 1.
double mse_loss(const Matrix& pred, const Vector& target, Matrix& grad);

// Row-wise softmax probabilities (temperature 1), numerically stabilized.
Matrix softmax_rows(const Matrix& logits);

}  // namespace tabembed
