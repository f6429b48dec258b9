#include <doctest.h>

#include "tabembed/optimizer.hpp"

using namespace tabembed;

namespace {

std::vector<ParamRef> refs(Matrix& p, Matrix& g) {
  return {ParamRef{&p, &g}};
}

}  // namespace

TEST_CASE("first AdamW step moves by about lr in the sign of the gradient") {
  Matrix p(1, 3), g(1, 3);
  p << 1.0, -2.0, 0.5;
  g << 0.3, -4.0, 1e-3;
  const Matrix before = p;
  AdamW opt(0.01, 0.0);
  auto params = refs(p, g);
  opt.step(params);
  for (Index j = 0; j < 3; ++j) {
    const double delta = p(0, j) - before(0, j);
    CHECK(delta * g(0, j) < 0.0);
    // bias correction makes m_hat/sqrt(v_hat) close to sign(g) on step one
    CHECK(std::fabs(std::fabs(delta) - 0.01) < 1e-4);
  }
}

TEST_CASE("zero gradient with weight decay shrinks parameters multiplicatively") {
  Matrix p(2, 2), g = Matrix::Zero(2, 2);
  p << 1.0, -3.0, 0.5, 2.0;
  const Matrix before = p;
  AdamW opt(0.1, 0.2);
  auto params = refs(p, g);
  opt.step(params);
  const Matrix expected = before * (1.0 - 0.1 * 0.2);
  CHECK((p - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("AdamW minimizes a simple quadratic") {
  Matrix p = Matrix::Zero(1, 1), g(1, 1);
  AdamW opt(0.1, 0.0);
  auto params = refs(p, g);
  for (int i = 0; i < 200; ++i) {
    g(0, 0) = 2.0 * (p(0, 0) - 3.0);  // d/dp (p-3)^2
    opt.step(params);
  }
  CHECK(std::fabs(p(0, 0) - 3.0) < 1e-3);
}

TEST_CASE("AdamW with zero decay matches a reference Adam trajectory") {
  Rng rng(4);
  std::normal_distribution<double> normal;
  Matrix p(3, 2);
  for (Index i = 0; i < p.size(); ++i) p.data()[i] = normal(rng);
  Matrix ref_p = p;
  Matrix g(3, 2);

  const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Matrix m = Matrix::Zero(3, 2), v = Matrix::Zero(3, 2);

  AdamW opt(lr, 0.0, b1, b2, eps);
  auto params = refs(p, g);
  for (int t = 1; t <= 50; ++t) {
    for (Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
    // reference Adam update written from the textbook recurrences
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v.array().matrix() + (1.0 - b2) * g.cwiseProduct(g);
    const Matrix m_hat = m / (1.0 - std::pow(b1, t));
    const Matrix v_hat = v / (1.0 - std::pow(b2, t));
    ref_p -= lr * (m_hat.array() / (v_hat.array().sqrt() + eps)).matrix();

    opt.step(params);
    CHECK((p - ref_p).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK(opt.steps_taken() == 50);
}

TEST_CASE("reset clears the moment history") {
  Matrix p(1, 1), g(1, 1);
  p << 0.0;
  g << 1.0;
  AdamW opt(0.01, 0.0);
  auto params = refs(p, g);
  opt.step(params);
  const double after_first = p(0, 0);
  opt.reset();
  CHECK(opt.steps_taken() == 0);
  p << 0.0;
  g << 1.0;
  opt.step(params);
  CHECK(p(0, 0) == after_first);
}
