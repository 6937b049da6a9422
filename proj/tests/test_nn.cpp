#include "doctest.h"

#include "xdboost/error.hpp"
#include "xdboost/nn/activation.hpp"
#include "xdboost/nn/adam.hpp"
#include "xdboost/nn/layers.hpp"
#include "xdboost/nn/loss.hpp"
#include "xdboost/nn/tensor.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace xdboost;
using namespace xdboost::nn;

TEST_CASE("activations on reference points") {
  CHECK(activation_apply(Activation::sigmoid, std::vector<double>{0.0})[0] == 0.5);
  CHECK(activation_apply(Activation::tanh, std::vector<double>{0.0})[0] == 0.0);
  const auto r = activation_apply(Activation::relu, std::vector<double>{-2.0, 3.0});
  CHECK(r == std::vector<double>{0.0, 3.0});
  CHECK(apply(Activation::identity, -1.25) == -1.25);
}

TEST_CASE("sigmoid and tanh stay strictly inside their ranges") {
  for (double x : {-1e6, -800.0, -40.0, -1.0, 0.0, 1.0, 40.0, 800.0, 1e6}) {
    const double s = apply(Activation::sigmoid, x);
    CHECK(s > 0.0);
    CHECK(s < 1.0);
    const double t = apply(Activation::tanh, x);
    CHECK(t > -1.0);
    CHECK(t < 1.0);
  }
}

TEST_CASE("activation names round-trip and unknown names are rejected") {
  for (auto k : {Activation::relu, Activation::sigmoid, Activation::tanh, Activation::identity}) {
    CHECK(parse_activation(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_activation("softmax"), ConfigError);
}

TEST_CASE("weighted BCE reference values") {
  const std::vector<double> half{0.5}, one{1.0};
  CHECK(weighted_bce_loss(half, one, {1.0, 1.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(weighted_bce_loss(half, one, {1.0, 4.0}) ==
        doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-12));
  const std::vector<double> p{0.9, 0.1}, y{1.0, 0.0};
  CHECK(weighted_bce_loss(p, y, {}) == doctest::Approx(-std::log(0.9)).epsilon(1e-12));
}

TEST_CASE("unit weights reproduce plain BCE exactly") {
  const std::vector<double> p{0.2, 0.7, 0.99, 0.01}, y{0.0, 1.0, 1.0, 0.0};
  double plain = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    plain += -y[i] * std::log(p[i]) - (1.0 - y[i]) * std::log(1.0 - p[i]);
  }
  plain /= static_cast<double>(p.size());
  CHECK(weighted_bce_loss(p, y, {1.0, 1.0}) == plain);
}

TEST_CASE("BCE clips probabilities and stays finite") {
  const std::vector<double> p{0.0, 1.0}, y{1.0, 0.0};
  const double l = weighted_bce_loss(p, y, {});
  CHECK(std::isfinite(l));
  CHECK(l == doctest::Approx(-std::log(kProbClip)));
  const auto g = weighted_bce_grad(p, y, {});
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
}

TEST_CASE("BCE gradient matches finite differences") {
  const std::vector<double> y{1.0, 0.0, 1.0};
  std::vector<double> p{0.3, 0.6, 0.85};
  const ClassWeights w{1.0, 2.5};
  const auto g = weighted_bce_grad(p, y, w);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double h = 1e-6, saved = p[i];
    p[i] = saved + h;
    const double up = weighted_bce_loss(p, y, w);
    p[i] = saved - h;
    const double down = weighted_bce_loss(p, y, w);
    p[i] = saved;
    CHECK(g[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("MAE reference values and subgradient") {
  CHECK(mae_loss(std::vector<double>{0, 0}, std::vector<double>{0, 0}) == 0.0);
  CHECK(mae_loss(std::vector<double>{0.5}, std::vector<double>{-0.5}) == 1.0);
  CHECK(mae_loss(std::vector<double>{0.2, -0.4}, std::vector<double>{0.0, 0.1}) ==
        doctest::Approx(0.35).epsilon(1e-12));
  const auto g = mae_grad(std::vector<double>{0.3, -0.3, 0.1}, std::vector<double>{0.0, 0.0, 0.1});
  CHECK(g[0] == doctest::Approx(1.0 / 3));
  CHECK(g[1] == doctest::Approx(-1.0 / 3));
  CHECK(g[2] == 0.0);
  CHECK_THROWS_AS(mae_loss(std::vector<double>{1.0}, std::vector<double>{}), InputError);
}

TEST_CASE("embedding lookup and scatter-add backward") {
  Rng rng(7);
  EmbeddingTable table("e", 4, 3);
  table.init(rng);
  const std::vector<std::int32_t> idx{2, 0, 2};
  EmbeddingCache cache;
  const Matrix out = table.forward(idx, &cache);
  CHECK(out.rows() == 3);
  CHECK(out.row(0) == table.table().value.row(2));

  Matrix g = Matrix::Ones(3, 3);
  table.table().zero_grad();
  table.backward(cache, g);
  CHECK(table.table().grad.row(2).sum() == doctest::Approx(6.0));
  CHECK(table.table().grad.row(0).sum() == doctest::Approx(3.0));
  // Rows never looked up get nothing.
  CHECK(table.table().grad.row(1).isZero());
  CHECK(table.table().grad.row(3).isZero());

  CHECK_THROWS_AS(table.forward(std::vector<std::int32_t>{4}), InputError);
  CHECK_THROWS_AS(table.backward(EmbeddingCache{}, g), UsageError);
}

TEST_CASE("dense layer backward before forward is a usage error") {
  DenseLayer layer("d", 3, 2, Activation::relu);
  CHECK_THROWS_AS(layer.backward(DenseCache{}, Matrix::Ones(1, 2)), UsageError);
}

TEST_CASE("dense layer gradients match finite differences") {
  Rng rng(11);
  DenseLayer layer("d", 4, 3, Activation::tanh);
  layer.init(rng);
  Matrix x(5, 4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);

  // loss = sum of outputs squared / 2
  auto loss = [&] { return 0.5 * layer.forward(x).squaredNorm(); };
  DenseCache cache;
  const Matrix y = layer.forward(x, &cache);
  layer.weights().zero_grad();
  layer.bias().zero_grad();
  const Matrix dx = layer.backward(cache, y);

  const double h = 1e-6;
  for (Parameter* p : {&layer.weights(), &layer.bias()}) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      const double saved = p->value.data()[i];
      p->value.data()[i] = saved + h;
      const double up = loss();
      p->value.data()[i] = saved - h;
      const double down = loss();
      p->value.data()[i] = saved;
      CHECK(p->grad.data()[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
    }
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + h;
    const double up = loss();
    x.data()[i] = saved - h;
    const double down = loss();
    x.data()[i] = saved;
    CHECK(dx.data()[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("glorot init respects its bound and seeds reproduce") {
  Rng a(3), b(3);
  Matrix m1 = Matrix::Zero(10, 20), m2 = Matrix::Zero(10, 20);
  glorot_uniform(m1, 20, 10, a);
  glorot_uniform(m2, 20, 10, b);
  CHECK(m1 == m2);
  CHECK(m1.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 30.0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("Adam: zero gradients leave parameters unchanged") {
  Parameter p("w", 2, 2);
  p.value << 1, 2, 3, 4;
  const Matrix before = p.value;
  std::vector<Parameter*> params{&p};
  AdamState s = AdamState::for_parameters(params, {});
  adam_step(params, s);
  CHECK(p.value == before);
  CHECK(s.step == 1);
}

TEST_CASE("Adam: first step with g = 1 moves the parameter by lr") {
  Parameter p("w", 1, 1);
  p.value(0, 0) = 0.5;
  std::vector<Parameter*> params{&p};
  AdamState s = AdamState::for_parameters(params, {1e-4, 0.9, 0.999, 1e-8});
  p.grad(0, 0) = 1.0;
  adam_step(params, s);
  // m_hat = 1, v_hat = 1: update = lr / (1 + eps).
  CHECK(p.value(0, 0) == doctest::Approx(0.5 - 1e-4 / (1.0 + 1e-8)).epsilon(1e-14));

  const double first = 0.5 - p.value(0, 0);
  const double before = p.value(0, 0);
  p.grad(0, 0) = 1.0;
  adam_step(params, s);
  const double second = before - p.value(0, 0);
  CHECK(std::abs(second - first) / first < 0.01);
}

TEST_CASE("Adam is deterministic and checks shapes") {
  auto run = [] {
    Parameter p("w", 1, 3);
    p.value << 0.1, -0.2, 0.3;
    std::vector<Parameter*> params{&p};
    AdamState s = AdamState::for_parameters(params, {1e-2, 0.9, 0.999, 1e-8});
    for (int k = 0; k < 5; ++k) {
      p.grad << 0.5 * k, -1.0, 0.25;
      adam_step(params, s);
    }
    return p.value;
  };
  CHECK(run() == run());

  Parameter a("a", 1, 2), b("b", 2, 2);
  std::vector<Parameter*> one{&a};
  AdamState s = AdamState::for_parameters(one, {});
  std::vector<Parameter*> two{&a, &b};
  CHECK_THROWS_AS(adam_step(two, s), UsageError);
  std::vector<Parameter*> other{&b};
  CHECK_THROWS_AS(adam_step(other, s), UsageError);
}

TEST_CASE("one shared weight looked up twice: d(w*w)/dw = 2w") {
  Rng rng(1);
  EmbeddingTable table("e", 1, 1);
  table.table().value(0, 0) = 3.0;
  EmbeddingCache cache;
  const std::vector<std::int32_t> idx{0, 0};
  const Matrix e = table.forward(idx, &cache);
  // f = e0 * e1, df/de0 = e1, df/de1 = e0
  Matrix g(2, 1);
  g << e(1, 0), e(0, 0);
  table.table().zero_grad();
  table.backward(cache, g);
  CHECK(table.table().grad(0, 0) == 6.0);
}
