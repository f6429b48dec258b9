#include "tabembed/optimizer.hpp"

#include <cmath>

namespace tabembed {

void AdamW::step(std::vector<ParamRef>& params) {
  if (m_.empty()) {
    for (const ParamRef& p : params) {
      m_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
      v_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& g = *params[i].grad;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    const Matrix m_hat = m_[i] / bc1;
    const Matrix v_hat = v_[i] / bc2;
    Matrix& p = *params[i].value;
    p -= lr_ * (m_hat.array() / (v_hat.array().sqrt() + eps_) + weight_decay_ * p.array())
             .matrix();
  }
}

}  // namespace tabembed
