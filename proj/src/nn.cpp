#include "tabembed/nn.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include <json.hpp>

namespace tabembed {

namespace {

void uniform_fill(Matrix& m, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = dist(rng);
}

}  // namespace

// --- layers ------------------------------------------------------------------

Linear::Linear(Index in, Index out, bool with_bias, Rng& rng) {
  weight.resize(in, out);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  uniform_fill(weight, bound, rng);
  grad_weight = Matrix::Zero(in, out);
  if (with_bias) {
    bias.resize(1, out);
    uniform_fill(bias, bound, rng);
    grad_bias = Matrix::Zero(1, out);
  }
}

Matrix Linear::forward(const Matrix& x, bool) {
  input_ = x;
  has_input_ = true;
  Matrix y = x * weight;
  if (bias.size() > 0) y.rowwise() += bias.row(0);
  return y;
}

Matrix Linear::backward(const Matrix& dy) {
  if (!has_input_) throw MissingForwardState("Linear::backward before forward");
  grad_weight.noalias() += input_.transpose() * dy;
  if (bias.size() > 0) grad_bias.row(0) += dy.colwise().sum();
  return dy * weight.transpose();
}

void Linear::collect_params(std::vector<ParamRef>& out) {
  out.push_back({&weight, &grad_weight});
  if (bias.size() > 0) out.push_back({&bias, &grad_bias});
}

Matrix ReLU::forward(const Matrix& x, bool) {
  input_ = x;
  has_input_ = true;
  return x.cwiseMax(0.0);
}

Matrix ReLU::backward(const Matrix& dy) {
  if (!has_input_) throw MissingForwardState("ReLU::backward before forward");
  return (input_.array() > 0.0).select(dy, Matrix::Zero(dy.rows(), dy.cols()));
}

Matrix LeakyReLU::forward(const Matrix& x, bool) {
  input_ = x;
  has_input_ = true;
  return (x.array() > 0.0).select(x, slope_ * x);
}

Matrix LeakyReLU::backward(const Matrix& dy) {
  if (!has_input_) throw MissingForwardState("LeakyReLU::backward before forward");
  return (input_.array() > 0.0).select(dy, slope_ * dy);
}

Matrix Softmax::forward(const Matrix& x, bool) {
  Matrix scaled = x / temperature_;
  output_.resize(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const double m = scaled.row(i).maxCoeff();
    Eigen::RowVectorXd e = (scaled.row(i).array() - m).exp();
    output_.row(i) = e / e.sum();
  }
  has_output_ = true;
  return output_;
}

Matrix Softmax::backward(const Matrix& dy) {
  if (!has_output_) throw MissingForwardState("Softmax::backward before forward");
  Matrix dx(dy.rows(), dy.cols());
  for (Index i = 0; i < dy.rows(); ++i) {
    const double dot = dy.row(i).dot(output_.row(i));
    dx.row(i) = (dy.row(i).array() - dot) * output_.row(i).array() / temperature_;
  }
  return dx;
}

Matrix Dropout::forward(const Matrix& x, bool train) {
  train_mask_ = train && rate_ > 0.0;
  if (!train_mask_) return x;
  std::bernoulli_distribution keep(1.0 - rate_);
  mask_.resize(x.rows(), x.cols());
  const double scale = 1.0 / (1.0 - rate_);
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) mask_(i, j) = keep(*rng_) ? scale : 0.0;
  return x.cwiseProduct(mask_);
}

Matrix Dropout::backward(const Matrix& dy) {
  if (!train_mask_) return dy;
  return dy.cwiseProduct(mask_);
}

Periodic::Periodic(Index k, double sigma, Rng& rng) {
  const PeriodicCoefficients coeffs = init_periodic(k, sigma, rng);
  freq = coeffs.c;
  grad_freq = Matrix::Zero(k, 1);
}

Periodic::Periodic(Vector frequencies) {
  freq = frequencies;
  grad_freq = Matrix::Zero(freq.rows(), 1);
}

Matrix Periodic::forward(const Matrix& x, bool) {
  if (x.cols() != 1) throw std::invalid_argument("Periodic expects a single column");
  input_ = x;
  has_input_ = true;
  const Index k = freq.rows();
  const Matrix v = 2.0 * std::numbers::pi * x * freq.transpose();  // batch x k
  sin_ = v.array().sin();
  cos_ = v.array().cos();
  Matrix out(x.rows(), 2 * k);
  out.leftCols(k) = sin_;
  out.rightCols(k) = cos_;
  return out;
}

Matrix Periodic::backward(const Matrix& dy) {
  if (!has_input_) throw MissingForwardState("Periodic::backward before forward");
  const Index k = freq.rows();
  // dv = d(sin v) * cos v - d(cos v) * sin v
  const Matrix dv =
      dy.leftCols(k).cwiseProduct(cos_) - dy.rightCols(k).cwiseProduct(sin_);
  const double two_pi = 2.0 * std::numbers::pi;
  grad_freq.col(0) += two_pi * (dv.transpose() * input_.col(0));
  return two_pi * (dv * freq);  // batch x 1
}

void Periodic::collect_params(std::vector<ParamRef>& out) {
  out.push_back({&freq, &grad_freq});
}

Matrix MixedFourier::forward(const Matrix& x, bool) {
  const Matrix v = 2.0 * std::numbers::pi * x * B_.transpose();
  sin_ = v.array().sin();
  cos_ = v.array().cos();
  has_input_ = true;
  Matrix out(x.rows(), 2 * B_.rows());
  out.leftCols(B_.rows()) = sin_;
  out.rightCols(B_.rows()) = cos_;
  return out;
}

Matrix MixedFourier::backward(const Matrix& dy) {
  if (!has_input_) throw MissingForwardState("MixedFourier::backward before forward");
  const Index mp = B_.rows();
  const Matrix dv = dy.leftCols(mp).cwiseProduct(cos_) - dy.rightCols(mp).cwiseProduct(sin_);
  return 2.0 * std::numbers::pi * (dv * B_);
}

Matrix Sequential::forward(const Matrix& x, bool train) {
  Matrix h = x;
  for (auto& m : modules_) h = m->forward(h, train);
  return h;
}

Matrix Sequential::backward(const Matrix& dy) {
  Matrix g = dy;
  for (auto it = modules_.rbegin(); it != modules_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

void Sequential::collect_params(std::vector<ParamRef>& out) {
  for (auto& m : modules_) m->collect_params(out);
}

Index Sequential::out_width(Index in) const {
  for (const auto& m : modules_) in = m->out_width(in);
  return in;
}

// --- embedding specs ---------------------------------------------------------

bool embedding_uses_bins(EmbeddingName n) {
  switch (n) {
    case EmbeddingName::Q:
    case EmbeddingName::QL:
    case EmbeddingName::QLR:
    case EmbeddingName::QLRLR:
    case EmbeddingName::T:
    case EmbeddingName::TL:
    case EmbeddingName::TLR:
    case EmbeddingName::TLRLR:
      return true;
    default:
      return false;
  }
}

bool embedding_uses_periodic(EmbeddingName n) {
  switch (n) {
    case EmbeddingName::P:
    case EmbeddingName::PL:
    case EmbeddingName::PLR:
    case EmbeddingName::PLRLR:
      return true;
    default:
      return false;
  }
}

namespace {

const std::pair<const char*, EmbeddingName> kEmbeddingNames[] = {
    {"L", EmbeddingName::L},         {"LR", EmbeddingName::LR},
    {"LRLR", EmbeddingName::LRLR},   {"Q", EmbeddingName::Q},
    {"Q-L", EmbeddingName::QL},      {"Q-LR", EmbeddingName::QLR},
    {"Q-LRLR", EmbeddingName::QLRLR},{"T", EmbeddingName::T},
    {"T-L", EmbeddingName::TL},      {"T-LR", EmbeddingName::TLR},
    {"T-LRLR", EmbeddingName::TLRLR},{"P", EmbeddingName::P},
    {"PL", EmbeddingName::PL},       {"PLR", EmbeddingName::PLR},
    {"PLRLR", EmbeddingName::PLRLR}, {"AutoDis", EmbeddingName::AutoDis},
};

}  // namespace

EmbeddingName parse_embedding_name(const std::string& s) {
  if (s.empty()) return EmbeddingName::Raw;
  for (const auto& [text, name] : kEmbeddingNames)
    if (s == text) return name;
  std::string valid;
  for (const auto& [text, name] : kEmbeddingNames) {
    if (!valid.empty()) valid += ", ";
    valid += text;
  }
  throw InconsistentSpec("unknown embedding name '" + s + "'; valid names: " + valid);
}

std::string embedding_name_string(EmbeddingName name) {
  if (name == EmbeddingName::Raw) return "";
  for (const auto& [text, n] : kEmbeddingNames)
    if (n == name) return text;
  throw InconsistentSpec("unmapped embedding name");
}

Index EmbeddingSpec::encoding_width() const {
  return embedding_uses_bins(name) && bins ? bins->bin_count() : 0;
}

Index EmbeddingSpec::output_width() const {
  switch (name) {
    case EmbeddingName::Raw: return 1;
    case EmbeddingName::Q:
    case EmbeddingName::T: return encoding_width();
    case EmbeddingName::P: return 2 * k;
    default: return d_embed;
  }
}

void EmbeddingSpec::validate() const {
  if (embedding_uses_bins(name) && !bins)
    throw InconsistentSpec("embedding '" + embedding_name_string(name) +
                           "' requires bin layouts");
  if (embedding_uses_periodic(name)) {
    if (k < 1) throw InconsistentSpec("periodic embedding requires k >= 1");
    if (!(sigma > 0.0)) throw InconsistentSpec("periodic embedding requires sigma > 0");
  }
  if (name != EmbeddingName::Raw && name != EmbeddingName::Q && name != EmbeddingName::T &&
      name != EmbeddingName::P && d_embed < 1)
    throw InconsistentSpec("embedding requires d_embed >= 1");
  if (name == EmbeddingName::AutoDis) {
    if (autodis_meta < 2) throw InconsistentSpec("AutoDis requires autodis_meta >= 2");
    if (!(autodis_temp > 0.0)) throw InconsistentSpec("AutoDis requires autodis_temp > 0");
  }
}

namespace {

std::unique_ptr<Sequential> build_embedding(const EmbeddingSpec& spec, Rng& rng) {
  spec.validate();
  auto seq = std::make_unique<Sequential>();
  const Index d = spec.d_embed;
  switch (spec.name) {
    case EmbeddingName::Raw:
    case EmbeddingName::Q:
    case EmbeddingName::T:
      break;  // identity over the scalar / precomputed encoding
    case EmbeddingName::L:
      seq->add(std::make_unique<Linear>(1, d, true, rng));
      break;
    case EmbeddingName::LR:
      seq->add(std::make_unique<Linear>(1, d, true, rng));
      seq->add(std::make_unique<ReLU>());
      break;
    case EmbeddingName::LRLR:
      seq->add(std::make_unique<Linear>(1, d, true, rng));
      seq->add(std::make_unique<ReLU>());
      seq->add(std::make_unique<Linear>(d, d, true, rng));
      seq->add(std::make_unique<ReLU>());
      break;
    case EmbeddingName::QL:
    case EmbeddingName::TL:
      seq->add(std::make_unique<Linear>(spec.encoding_width(), d, true, rng));
      break;
    case EmbeddingName::QLR:
    case EmbeddingName::TLR:
      seq->add(std::make_unique<Linear>(spec.encoding_width(), d, true, rng));
      seq->add(std::make_unique<ReLU>());
      break;
    case EmbeddingName::QLRLR:
    case EmbeddingName::TLRLR:
      seq->add(std::make_unique<Linear>(spec.encoding_width(), d, true, rng));
      seq->add(std::make_unique<ReLU>());
      seq->add(std::make_unique<Linear>(d, d, true, rng));
      seq->add(std::make_unique<ReLU>());
      break;
    case EmbeddingName::P:
      seq->add(std::make_unique<Periodic>(spec.k, spec.sigma, rng));
      break;
    case EmbeddingName::PL:
      seq->add(std::make_unique<Periodic>(spec.k, spec.sigma, rng));
      seq->add(std::make_unique<Linear>(2 * spec.k, d, true, rng));
      break;
    case EmbeddingName::PLR:
      seq->add(std::make_unique<Periodic>(spec.k, spec.sigma, rng));
      seq->add(std::make_unique<Linear>(2 * spec.k, d, true, rng));
      seq->add(std::make_unique<ReLU>());
      break;
    case EmbeddingName::PLRLR:
      seq->add(std::make_unique<Periodic>(spec.k, spec.sigma, rng));
      seq->add(std::make_unique<Linear>(2 * spec.k, d, true, rng));
      seq->add(std::make_unique<ReLU>());
      seq->add(std::make_unique<Linear>(d, d, true, rng));
      seq->add(std::make_unique<ReLU>());
      break;
    case EmbeddingName::AutoDis: {
      const Index m = spec.autodis_meta;
      seq->add(std::make_unique<Linear>(1, m, false, rng));
      seq->add(std::make_unique<LeakyReLU>());
      seq->add(std::make_unique<Linear>(m, m, false, rng));
      seq->add(std::make_unique<Softmax>(spec.autodis_temp));
      seq->add(std::make_unique<Linear>(m, d, true, rng));
      break;
    }
  }
  return seq;
}

}  // namespace

// --- model -------------------------------------------------------------------

Model::Model(std::vector<EmbeddingSpec> specs, MLPConfig backbone, Index n_num,
             Index n_cat_onehot, Index n_outputs, std::uint64_t seed)
    : specs_(std::move(specs)),
      backbone_config_(backbone),
      n_num_(n_num),
      n_cat_onehot_(n_cat_onehot),
      n_outputs_(n_outputs),
      seed_(seed),
      dropout_rng_(seed + 0x9e3779b97f4a7c15ULL) {
  if (static_cast<Index>(specs_.size()) != n_num_)
    throw InconsistentSpec("need one embedding spec per numerical feature");

  Rng rng(seed);
  Index concat_width = 0;
  for (const auto& spec : specs_) {
    embeddings_.push_back(build_embedding(spec, rng));
    widths_.push_back(spec.output_width());
    concat_width += widths_.back();
  }
  concat_width += n_cat_onehot_;

  Index in = concat_width;
  for (Index l = 0; l < backbone_config_.n_layers; ++l) {
    backbone_.add(std::make_unique<Linear>(in, backbone_config_.layer_size, true, rng));
    backbone_.add(std::make_unique<ReLU>());
    if (backbone_config_.dropout > 0.0)
      backbone_.add(std::make_unique<Dropout>(backbone_config_.dropout, &dropout_rng_));
    in = backbone_config_.layer_size;
  }
  backbone_.add(std::make_unique<Linear>(in, n_outputs_, true, rng));
}

Matrix Model::forward(const Batch& batch, bool train) {
  const Index n = batch.x_num.rows();
  if (batch.x_num.cols() != n_num_)
    throw std::invalid_argument("Model::forward: numerical width mismatch");
  if (n_cat_onehot_ > 0 && batch.x_cat_onehot.cols() != n_cat_onehot_)
    throw std::invalid_argument("Model::forward: categorical width mismatch");

  Index total = n_cat_onehot_;
  for (Index w : widths_) total += w;
  concat_.resize(n, total);

  Index off = 0;
  for (Index f = 0; f < n_num_; ++f) {
    Matrix in;
    if (specs_[f].encoding_width() > 0) {
      if (static_cast<Index>(batch.encodings.size()) <= f || batch.encodings[f].size() == 0)
        throw std::invalid_argument("Model::forward: missing precomputed encoding for feature " +
                                    std::to_string(f));
      in = batch.encodings[f];
    } else {
      in = batch.x_num.col(f);
    }
    concat_.middleCols(off, widths_[f]) = embeddings_[f]->forward(in, train);
    off += widths_[f];
  }
  if (n_cat_onehot_ > 0) concat_.middleCols(off, n_cat_onehot_) = batch.x_cat_onehot;

  has_forward_ = true;
  Matrix out = backbone_.forward(concat_, train);
  if (!out.allFinite())
    throw NonFiniteActivation("Model::forward produced non-finite outputs");
  return out;
}

void Model::backward(const Matrix& dloss) {
  if (!has_forward_) throw MissingForwardState("Model::backward before forward");
  const Matrix dconcat = backbone_.backward(dloss);
  Index off = 0;
  for (Index f = 0; f < n_num_; ++f) {
    embeddings_[f]->backward(dconcat.middleCols(off, widths_[f]));
    off += widths_[f];
  }
}

std::vector<ParamRef> Model::params() {
  std::vector<ParamRef> out;
  for (auto& e : embeddings_) e->collect_params(out);
  backbone_.collect_params(out);
  return out;
}

std::int64_t Model::param_count() {
  std::int64_t n = 0;
  for (const ParamRef& p : params()) n += p.value->size();
  return n;
}

void Model::zero_grad() {
  for (ParamRef& p : params()) p.grad->setZero();
}

std::vector<Matrix> Model::snapshot_params() {
  std::vector<Matrix> snap;
  for (ParamRef& p : params()) snap.push_back(*p.value);
  return snap;
}

void Model::restore_params(const std::vector<Matrix>& snapshot) {
  auto refs = params();
  if (snapshot.size() != refs.size())
    throw std::invalid_argument("restore_params: snapshot shape mismatch");
  for (std::size_t i = 0; i < refs.size(); ++i) *refs[i].value = snapshot[i];
}

// --- checkpoints -------------------------------------------------------------

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const Index rows = static_cast<Index>(j.size());
  const Index cols = rows > 0 ? static_cast<Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  return m;
}

}  // namespace

void Model::save(std::ostream& os) const {
  nlohmann::json j;
  j["n_num"] = n_num_;
  j["n_cat_onehot"] = n_cat_onehot_;
  j["n_outputs"] = n_outputs_;
  j["seed"] = seed_;
  j["backbone"] = {{"n_layers", backbone_config_.n_layers},
                   {"layer_size", backbone_config_.layer_size},
                   {"dropout", backbone_config_.dropout}};
  nlohmann::json specs = nlohmann::json::array();
  for (const auto& s : specs_) {
    nlohmann::json sj;
    sj["name"] = embedding_name_string(s.name);
    sj["d_embed"] = s.d_embed;
    sj["k"] = s.k;
    sj["sigma"] = s.sigma;
    sj["autodis_meta"] = s.autodis_meta;
    sj["autodis_temp"] = s.autodis_temp;
    sj["encode_kind"] = static_cast<int>(s.encode_kind);
    sj["gamma"] = s.gamma;
    if (s.bins) {
      nlohmann::json b = nlohmann::json::array();
      for (Index i = 0; i < s.bins->boundaries.size(); ++i) b.push_back(s.bins->boundaries[i]);
      sj["bins"] = std::move(b);
      sj["bins_feature"] = s.bins->feature_index;
    }
    specs.push_back(std::move(sj));
  }
  j["specs"] = std::move(specs);

  nlohmann::json params = nlohmann::json::array();
  for (const ParamRef& p : const_cast<Model*>(this)->params())
    params.push_back(matrix_to_json(*p.value));
  j["params"] = std::move(params);
  os << j.dump();
}

Model Model::load(std::istream& is) {
  nlohmann::json j = nlohmann::json::parse(is);
  std::vector<EmbeddingSpec> specs;
  for (const auto& sj : j.at("specs")) {
    EmbeddingSpec s;
    s.name = parse_embedding_name(sj.at("name").get<std::string>());
    s.d_embed = sj.at("d_embed").get<Index>();
    s.k = sj.at("k").get<Index>();
    s.sigma = sj.at("sigma").get<double>();
    s.autodis_meta = sj.at("autodis_meta").get<Index>();
    s.autodis_temp = sj.at("autodis_temp").get<double>();
    s.encode_kind = static_cast<EncodeKind>(sj.at("encode_kind").get<int>());
    s.gamma = sj.at("gamma").get<double>();
    if (sj.contains("bins")) {
      BinLayout layout;
      const auto& b = sj.at("bins");
      layout.boundaries.resize(static_cast<Index>(b.size()));
      for (Index i = 0; i < layout.boundaries.size(); ++i) layout.boundaries[i] = b[i].get<double>();
      layout.feature_index = sj.at("bins_feature").get<Index>();
      s.bins = std::move(layout);
    }
    specs.push_back(std::move(s));
  }
  MLPConfig backbone;
  backbone.n_layers = j.at("backbone").at("n_layers").get<Index>();
  backbone.layer_size = j.at("backbone").at("layer_size").get<Index>();
  backbone.dropout = j.at("backbone").at("dropout").get<double>();

  Model model(std::move(specs), backbone, j.at("n_num").get<Index>(),
              j.at("n_cat_onehot").get<Index>(), j.at("n_outputs").get<Index>(),
              j.at("seed").get<std::uint64_t>());
  auto refs = model.params();
  const auto& params = j.at("params");
  if (params.size() != refs.size())
    throw std::runtime_error("Model::load: parameter count mismatch");
  for (std::size_t i = 0; i < refs.size(); ++i) *refs[i].value = matrix_from_json(params[i]);
  return model;
}

// --- closed-form embedding ops ----------------------------------------------

Vector linear_ple_embed(double x, const BinLayout& bins, const Vector& v0,
                        const Matrix& V) {
  if (V.rows() != bins.bin_count() || v0.size() != V.cols())
    throw std::invalid_argument("linear_ple_embed: shape mismatch");
  const Vector e = ple_encode(x, bins);
  return v0 + V.transpose() * e;
}

Vector autodis_embed(double x, const Matrix& w1, const Matrix& w2, const Matrix& w3,
                     const Vector& b3, double temperature, double slope) {
  Vector h = w1.transpose() * Vector::Constant(1, x);
  h = (h.array() > 0.0).select(h, slope * h);
  h = w2.transpose() * h;
  // softmax(h / temperature)
  Vector scaled = h / temperature;
  const double m = scaled.maxCoeff();
  Vector w = (scaled.array() - m).exp();
  w /= w.sum();
  return w3.transpose() * w + b3;
}

// --- losses ------------------------------------------------------------------

Matrix softmax_rows(const Matrix& logits) {
  Matrix probs(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
    probs.row(i) = e / e.sum();
  }
  return probs;
}

double softmax_cross_entropy(const Matrix& logits, const std::vector<Index>& labels,
                             Matrix& grad) {
  if (static_cast<Index>(labels.size()) != logits.rows())
    throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
  const Matrix probs = softmax_rows(logits);
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  grad = probs * inv_n;
  double loss = 0.0;
  for (Index i = 0; i < logits.rows(); ++i) {
    loss -= std::log(std::max(probs(i, labels[i]), 1e-300));
    grad(i, labels[i]) -= inv_n;
  }
  return loss * inv_n;
}

double mse_loss(const Matrix& pred, const Vector& target, Matrix& grad) {
  if (pred.cols() != 1 || pred.rows() != target.size())
    throw std::invalid_argument("mse_loss: shape mismatch");
  const Vector diff = pred.col(0) - target;
  const double inv_n = 1.0 / static_cast<double>(diff.size());
  grad = (2.0 * inv_n) * diff;
  return diff.squaredNorm() * inv_n;
}

}  // namespace tabembed
