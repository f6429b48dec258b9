#pragma once

#include <vector>

#include "tabembed/nn.hpp"

namespace tabembed {

// AdamW: Adam with decoupled weight decay,
//   p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p)
class AdamW {
 public:
  AdamW(double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
        double eps = 1e-8)
      : lr_(lr), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<ParamRef>& params);
  void reset() { t_ = 0; m_.clear(); v_.clear(); }
  int steps_taken() const { return t_; }

 private:
  double lr_, weight_decay_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<Matrix> m_, v_;
};

}  // namespace tabembed
