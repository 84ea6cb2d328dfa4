// Copyright 2026 The ProtestLens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "protestlens/error.hpp"
#include "protestlens/nn/attention.hpp"
#include "protestlens/nn/grad_check.hpp"
#include "protestlens/nn/layers.hpp"
#include "protestlens/nn/loss.hpp"
#include "protestlens/nn/optimizer.hpp"
#include "protestlens/nn/recurrent.hpp"
#include "support/fixtures.hpp"

using namespace protestlens;
using namespace protestlens::nn;
using protestlens::testing::random_matrix;

namespace {

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Tensor2 mat(std::initializer_list<std::initializer_list<double>> rows) {
  Tensor2 m(static_cast<Eigen::Index>(rows.size()),
            static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

RowVector row(std::initializer_list<double> values) {
  RowVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index j = 0;
  for (double x : values) v[j++] = x;
  return v;
}

std::vector<Tensor2> zero_grads(Layer& layer) {
  std::vector<Tensor2> g;
  for (auto* p : layer.parameters()) g.push_back(Tensor2::Zero(p->rows(), p->cols()));
  return g;
}

void fill_params(Layer& layer, double value) {
  for (auto* p : layer.parameters()) p->setConstant(value);
}

}  // namespace

TEST_CASE("dense_forward hand cases") {
  const RowVector x = row({1, 1});
  CHECK(dense_forward(x, Tensor2::Identity(2, 2), RowVector::Zero(2), Activation::Identity)
            .isApprox(x));
  const RowVector y = dense_forward(x, mat({{1, 2}, {3, 4}}), row({0, 1}), Activation::Identity);
  CHECK(y[0] == doctest::Approx(3.0));
  CHECK(y[1] == doctest::Approx(8.0));
  const RowVector s = dense_forward(row({0.3, -2}), Tensor2::Zero(3, 2), RowVector::Zero(3),
                                    Activation::Sigmoid);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(s[i] == 0.5);
  CHECK_THROWS_AS(dense_forward(row({1, 2, 3}), mat({{1, 2}}), row({0}), Activation::Identity),
                  ShapeError);
}

TEST_CASE("conv1d and maxpool hand cases") {
  const Tensor2 x = mat({{1}, {2}, {3}, {4}});
  const Tensor2 y = conv1d_forward(x, mat({{1, 1}}), row({0}), 2);
  REQUIRE(y.rows() == 3);
  CHECK(y(0, 0) == 3.0);
  CHECK(y(1, 0) == 5.0);
  CHECK(y(2, 0) == 7.0);

  // Delta kernel at offset 0 copies the input prefix.
  const Tensor2 d = conv1d_forward(x, mat({{1, 0, 0}}), row({0}), 3);
  CHECK(d(0, 0) == 1.0);
  CHECK(d(1, 0) == 2.0);
  CHECK_THROWS_AS(conv1d_forward(x, mat({{1, 1, 1, 1, 1}}), row({0}), 5), ShapeError);

  const Tensor2 p = maxpool1d_forward(mat({{1}, {3}, {2}, {5}, {4}, {0}}), 3);
  REQUIRE(p.rows() == 2);
  CHECK(p(0, 0) == 3.0);
  CHECK(p(1, 0) == 5.0);
  CHECK(maxpool1d_forward(Tensor2::Constant(7, 2, 1.5), 3).isApprox(Tensor2::Constant(2, 2, 1.5)));
  CHECK_THROWS_AS(maxpool1d_forward(Tensor2::Zero(2, 1), 3), ShapeError);
}

TEST_CASE("layer output lengths on random shapes") {
  CounterRng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t L = 1 + rng.below(40);
    const std::size_t d = 1 + rng.below(5);
    const std::size_t k = 1 + rng.below(6);
    const std::size_t w = 1 + rng.below(4);
    const std::size_t h = 1 + rng.below(4);
    Conv1d conv(d, 3, k);
    if (L >= k) {
      conv.initialize(rng);
      const Tensor2 y = conv.forward(random_matrix(L, d, rng), nullptr);
      CHECK(static_cast<std::size_t>(y.rows()) == L - k + 1);
      CHECK(conv.output_shape({L, d}) == Shape{L - k + 1, 3});
    } else {
      CHECK_THROWS_AS(conv.output_shape({L, d}), ShapeError);
    }
    MaxPool1d pool(w);
    if (L >= w) CHECK(pool.forward(random_matrix(L, d, rng), nullptr).rows() ==
                      static_cast<Eigen::Index>(L / w));
    auto bi = make_bigru(d, h);
    bi->initialize(rng);
    const Tensor2 out = bi->forward(random_matrix(L, d, rng), nullptr);
    CHECK(out.rows() == static_cast<Eigen::Index>(L));
    CHECK(out.cols() == static_cast<Eigen::Index>(2 * h));
    CHECK(all_finite(out));
  }
}

TEST_CASE("gru_step hand oracles") {
  CHECK(sigmoid(0.0) == 0.5);
  Gru zero(3, 2);
  fill_params(zero, 0.0);
  const RowVector h0 = row({0.4, -0.6});
  CHECK(zero.step(row({1, 2, 3}), h0).isApprox(0.5 * h0, 1e-15));

  Gru ones(1, 1);
  ones.input_weight().setConstant(1.0);
  ones.recurrent_weight().setConstant(1.0);
  ones.bias().setZero();
  CHECK(ones.step(row({0}), row({0}))[0] == 0.0);

  Gru cell(1, 1);
  cell.input_weight().setConstant(0.5);
  cell.recurrent_weight().setConstant(0.5);
  cell.bias().setZero();
  const double x = 1.0;
  const double h = 0.2;
  const double z = sig(0.5 * x + 0.5 * h);
  const double r = sig(0.5 * x + 0.5 * h);
  const double c = std::tanh(0.5 * x + 0.5 * (r * h));
  const double expected = (1 - z) * h + z * c;
  CHECK(std::abs(cell.step(row({x}), row({h}))[0] - expected) < 1e-12);

  cell.bias().setConstant(0.5);
  const double zb = sig(0.5 * x + 0.5 * h + 0.5);
  const double cb = std::tanh(0.5 * x + 0.5 * (zb * h) + 0.5);
  CHECK(std::abs(cell.step(row({x}), row({h}))[0] - ((1 - zb) * h + zb * cb)) < 1e-12);
  CHECK_THROWS_AS(cell.step(row({1, 2}), row({h})), ShapeError);
}

TEST_CASE("lstm_step hand oracles") {
  Lstm zero(2, 2);
  fill_params(zero, 0.0);
  const RowVector c0 = row({0.8, -0.4});
  const auto [h, c] = zero.step(row({1, 1}), row({0.3, 0.1}), c0);
  CHECK(c.isApprox(0.5 * c0, 1e-15));
  CHECK(h.isApprox((0.5 * c.array().tanh()).matrix(), 1e-15));
  const auto [hz, cz] = zero.step(RowVector::Zero(2), RowVector::Zero(2), RowVector::Zero(2));
  CHECK(hz.isZero());
  CHECK(cz.isZero());

  Lstm cell(1, 1);
  fill_params(cell, 0.3);
  const double pre = 0.3 * 1.0 + 0.3 * 0.0 + 0.3;
  const double i = sig(pre), f = sig(pre), g = std::tanh(pre), o = sig(pre);
  const double c_expected = f * 0.0 + i * g;
  const double h_expected = o * std::tanh(c_expected);
  const auto [h1, c1] = cell.step(row({1}), row({0}), row({0}));
  CHECK(std::abs(c1[0] - c_expected) < 1e-12);
  CHECK(std::abs(h1[0] - h_expected) < 1e-12);
}

TEST_CASE("bidirectional matches two manual unidirectional runs") {
  CounterRng rng(11);
  auto bi = make_bigru(3, 2);
  bi->initialize(rng);
  const Tensor2 x = random_matrix(3, 3, rng);
  const Tensor2 y = bi->forward(x, nullptr);
  const auto& f = static_cast<const Gru&>(bi->forward_layer());
  const auto& b = static_cast<const Gru&>(bi->backward_layer());
  RowVector hf = RowVector::Zero(2), hb = RowVector::Zero(2);
  std::vector<RowVector> fwd, bwd(3);
  for (int t = 0; t < 3; ++t) fwd.push_back(hf = f.step(x.row(t), hf));
  for (int t = 2; t >= 0; --t) bwd[t] = hb = b.step(x.row(t), hb);
  for (int t = 0; t < 3; ++t) {
    CHECK(y.row(t).head(2).isApprox(fwd[t], 1e-14));
    CHECK(y.row(t).tail(2).isApprox(bwd[t], 1e-14));
  }

  auto fin = make_bilstm(3, 2, false);
  fin->initialize(rng);
  const Tensor2 yf = fin->forward(x, nullptr);
  const Tensor2 seq = make_bilstm(3, 2, true)->forward(x, nullptr);  // zero-init shape only
  CHECK(yf.rows() == 1);
  CHECK(yf.cols() == 4);
  CHECK(seq.cols() == 4);
  CHECK(fin->describe() == "bilstm(2,final)");
}

TEST_CASE("bidirectional palindrome symmetry and single step") {
  CounterRng rng(5);
  auto bi = make_bigru(2, 3);
  bi->initialize(rng);
  // Tie the two directions.
  auto fp = bi->forward_layer().parameters();
  auto bp = bi->backward_layer().parameters();
  for (std::size_t i = 0; i < fp.size(); ++i) *bp[i] = *fp[i];
  const Tensor2 x = mat({{0.1, 0.5}, {-0.3, 0.2}, {0.7, 0.7}, {-0.3, 0.2}, {0.1, 0.5}});
  const Tensor2 y = bi->forward(x, nullptr);
  for (int t = 0; t < 5; ++t) {
    CHECK(y.row(t).head(3).isApprox(y.row(4 - t).tail(3), 1e-14));
  }
  const Tensor2 one = bi->forward(mat({{0.4, -0.1}}), nullptr);
  CHECK(one.row(0).head(3).isApprox(one.row(0).tail(3), 1e-14));
}

TEST_CASE("attention hand cases and weight invariants") {
  AttentionContext att(1);
  att.projection().setConstant(1.0);
  att.bias().setZero();
  att.context().setConstant(1.0);
  const Tensor2 h = mat({{std::atanh(0.2)}, {std::atanh(0.8)}});
  const RowVector a = att.weights(h);
  const double e1 = std::exp(0.2), e2 = std::exp(0.8);
  CHECK(a[0] == doctest::Approx(e1 / (e1 + e2)).epsilon(1e-12));
  CHECK(a[0] == doctest::Approx(0.354).epsilon(1e-3));
  CHECK(a[1] == doctest::Approx(0.646).epsilon(1e-3));
  const Tensor2 out = att.forward(h, nullptr);
  CHECK(std::abs(out(0, 0) - (a[0] * h(0, 0) + a[1] * h(1, 0))) < 1e-12);

  CounterRng rng(3);
  AttentionContext big(4);
  big.initialize(rng);
  const Tensor2 same = Tensor2::Constant(6, 4, 0.25);
  const RowVector u = big.weights(same);
  for (Eigen::Index t = 0; t < 6; ++t) CHECK(u[t] == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(big.forward(same, nullptr).isApprox(same.row(0), 1e-12));
  CHECK(big.weights(same.topRows(1))[0] == 1.0);

  for (int trial = 0; trial < 100; ++trial) {
    const Tensor2 states = random_matrix(1 + rng.below(20), 4, rng, -3, 3);
    const RowVector w = big.weights(states);
    CHECK(w.minCoeff() >= 0.0);
    CHECK(std::abs(w.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("bce loss values and bounds") {
  CHECK(bce_loss(1 - kBceEpsilon, 1) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(bce_loss(0.5, 1) == doctest::Approx(std::log(2.0)));
  CHECK(bce_loss(0.5, 0) == doctest::Approx(std::log(2.0)));
  CHECK(std::isfinite(bce_loss(0.0, 1)));
  CHECK(std::isfinite(bce_loss(1.0, 0)));
  CHECK(clip_probability(1.0) == 1 - kBceEpsilon);
  CounterRng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform();
    CHECK(bce_loss(p, static_cast<int>(rng.below(2))) >= 0.0);
    const double z = rng.uniform(-30, 30);
    CHECK(sigmoid(z) > 0.0);
    CHECK(sigmoid(z) < 1.0);
  }
}

TEST_CASE("dense backward matches the outer-product form") {
  Dense dense(2, 2);
  dense.weight() = mat({{0.5, -1}, {2, 0.25}});
  dense.bias() = row({0.1, -0.2});
  const Tensor2 x = mat({{1.5, -0.5}});
  Tape tape;
  dense.forward(x, &tape);
  const Tensor2 delta = mat({{0.3, -0.7}});
  auto grads = zero_grads(dense);
  const Tensor2 dx = dense.backward(tape, delta, grads);
  CHECK(grads[0].isApprox(delta.transpose() * x, 1e-15));
  CHECK(grads[1].isApprox(delta, 1e-15));
  CHECK(dx.isApprox(delta * dense.weight(), 1e-15));

  auto zg = zero_grads(dense);
  dense.backward(tape, Tensor2::Zero(1, 2), zg);
  for (const auto& g : zg) CHECK(g.isZero());

  Tape empty;
  CHECK_THROWS_AS(dense.backward(empty, delta, grads), Error);
}

TEST_CASE("zero loss gradient yields zero gradients for every layer") {
  CounterRng rng(21);
  std::vector<LayerPtr> layers;
  layers.push_back(std::make_unique<Conv1d>(3, 2, 2, Activation::Relu));
  layers.push_back(make_bigru(3, 2));
  layers.push_back(make_bilstm(3, 2, false));
  layers.push_back(std::make_unique<AttentionContext>(3));
  for (auto& layer : layers) {
    layer->initialize(rng);
    const Tensor2 x = random_matrix(5, 3, rng);
    Tape tape;
    const Tensor2 y = layer->forward(x, &tape);
    auto grads = zero_grads(*layer);
    const Tensor2 dx = layer->backward(tape, Tensor2::Zero(y.rows(), y.cols()), grads);
    CHECK(dx.isZero());
    for (const auto& g : grads) CHECK(g.isZero());
  }
}

TEST_CASE("optimizer steps") {
  const std::vector<Shape> shapes = {{1, 1}};
  Tensor2 theta = Tensor2::Constant(1, 1, 2.0);
  std::vector<Tensor2*> params = {&theta};

  Optimizer rms(OptimizerConfig::rmsprop(), shapes);
  rms.step(params, std::vector<Tensor2>{Tensor2::Zero(1, 1)});
  CHECK(theta(0, 0) == 2.0);

  Optimizer rms1(OptimizerConfig::rmsprop(), shapes);
  rms1.step(params, std::vector<Tensor2>{Tensor2::Constant(1, 1, 1.0)});
  const double expected = -0.001 / (std::sqrt(0.1) + 1e-7);
  CHECK(std::abs((theta(0, 0) - 2.0) - expected) < 1e-15);
  CHECK(theta(0, 0) - 2.0 == doctest::Approx(-0.003162).epsilon(1e-3));

  for (double g : {3.0, -0.01, 1e-4}) {
    Tensor2 t = Tensor2::Zero(1, 1);
    std::vector<Tensor2*> ps = {&t};
    Optimizer adam(OptimizerConfig::adam(), shapes);
    adam.step(ps, std::vector<Tensor2>{Tensor2::Constant(1, 1, g)});
    CHECK(t(0, 0) == doctest::Approx(-0.001 * (g > 0 ? 1 : -1)).epsilon(1e-3));
  }

  CounterRng rng(1);
  for (auto cfg : {OptimizerConfig::rmsprop(0.0), OptimizerConfig::adam(0.0)}) {
    Tensor2 p = random_matrix(3, 2, rng);
    const Tensor2 before = p;
    std::vector<Tensor2*> ps = {&p};
    Optimizer opt(cfg, std::vector<Shape>{{3, 2}});
    for (int s = 0; s < 3; ++s) opt.step(ps, std::vector<Tensor2>{random_matrix(3, 2, rng)});
    CHECK(p == before);
  }

  Tensor2 q = Tensor2::Zero(1, 1);
  std::vector<Tensor2*> qs = {&q};
  Optimizer opt(OptimizerConfig::adam(), shapes);
  CHECK_THROWS_AS(opt.step(qs, std::vector<Tensor2>{Tensor2::Constant(1, 1, NAN)}), DivergenceError);
  CHECK(q(0, 0) == 0.0);
  CHECK(opt.step_count(0) == 0);
}

TEST_CASE("optimizer leaves inactive parameters untouched") {
  Tensor2 a = Tensor2::Constant(1, 1, 1.0), b = Tensor2::Constant(1, 1, 1.0);
  std::vector<Tensor2*> ps = {&a, &b};
  Optimizer opt(OptimizerConfig::adam(), std::vector<Shape>{{1, 1}, {1, 1}});
  const std::vector<std::size_t> only_b = {1};
  opt.step(ps, std::vector<Tensor2>{Tensor2::Constant(1, 1, 1.0), Tensor2::Constant(1, 1, 1.0)},
           only_b);
  CHECK(a(0, 0) == 1.0);
  CHECK(b(0, 0) < 1.0);
  CHECK(opt.step_count(0) == 0);
  CHECK(opt.step_count(1) == 1);
}

TEST_CASE("grad_check on closed forms") {
  const std::vector<double> point = {3.0};
  const std::vector<double> analytic = {6.0};
  const auto r = grad_check([](std::span<const double> v) { return v[0] * v[0]; }, point, analytic);
  CHECK(r.max_rel_error < 1e-8);
  CHECK(r.checked == 1);

  // Dense + sigmoid + BCE composite.
  CounterRng rng(17);
  Dense dense(4, 1, Activation::Sigmoid);
  dense.initialize(rng);
  dense.bias().setConstant(0.3);
  const Tensor2 x = random_matrix(1, 4, rng);
  const int y = 1;
  Tape tape;
  const double p = dense.forward(x, &tape)(0, 0);
  auto grads = zero_grads(dense);
  dense.backward(tape, Tensor2::Constant(1, 1, bce_grad(p, y)), grads);
  std::vector<double> theta, g;
  for (int j = 0; j < 4; ++j) {
    theta.push_back(dense.weight()(0, j));
    g.push_back(grads[0](0, j));
  }
  theta.push_back(dense.bias()(0, 0));
  g.push_back(grads[1](0, 0));
  auto loss = [&](std::span<const double> v) {
    Dense d = dense;
    for (int j = 0; j < 4; ++j) d.weight()(0, j) = v[static_cast<std::size_t>(j)];
    d.bias()(0, 0) = v[4];
    return bce_loss(d.forward(x, nullptr)(0, 0), y);
  };
  CHECK(grad_check(loss, theta, g).max_rel_error < 1e-4);
}

TEST_CASE("every layer passes the finite-difference check") {
  CounterRng rng(99);
  std::vector<std::pair<LayerPtr, Shape>> cases;
  cases.emplace_back(std::make_unique<Dense>(5, 3, Activation::Tanh), Shape{1, 5});
  cases.emplace_back(std::make_unique<Dense>(5, 3, Activation::Relu), Shape{2, 5});
  cases.emplace_back(std::make_unique<Conv1d>(3, 4, 3, Activation::Relu), Shape{7, 3});
  cases.emplace_back(std::make_unique<MaxPool1d>(3), Shape{8, 2});
  cases.emplace_back(std::make_unique<Flatten>(), Shape{3, 2});
  cases.emplace_back(std::make_unique<Gru>(3, 4), Shape{1, 3});
  cases.emplace_back(std::make_unique<Gru>(3, 4), Shape{5, 3});
  cases.emplace_back(std::make_unique<Lstm>(3, 4), Shape{5, 3});
  cases.emplace_back(make_bigru(2, 3), Shape{4, 2});
  cases.emplace_back(make_bilstm(2, 3, false), Shape{4, 2});
  cases.emplace_back(std::make_unique<AttentionContext>(4), Shape{5, 4});
  cases.emplace_back(std::make_unique<ActivationLayer>(Activation::Sigmoid), Shape{3, 3});
  cases.emplace_back(std::make_unique<ActivationLayer>(Activation::Relu), Shape{3, 3});
  for (auto& [layer, shape] : cases) {
    CAPTURE(layer->describe());
    layer->initialize(rng);
    // Nonzero biases exercise the bias paths.
    for (auto* p : layer->parameters())
      if (p->rows() == 1) *p = random_matrix(1, static_cast<std::size_t>(p->cols()), rng, -0.5, 0.5);
    for (int point = 0; point < 3; ++point) {
      const auto r = grad_check_layer(*layer, random_matrix(shape.rows, shape.cols, rng), rng);
      CHECK(r.max_rel_error <= 1e-4);
      CHECK(r.checked > 0);
    }
  }
}

TEST_CASE("maxpool ties are skipped with a notice") {
  MaxPool1d pool(2);
  const Tensor2 x = mat({{1.0}, {1.0}, {0.5}, {0.2}});
  CounterRng rng(4);
  const auto r = grad_check_layer(pool, x, rng);
  CHECK(r.skipped > 0);
  CHECK(!r.notices.empty());
  CHECK(r.max_rel_error <= 1e-4);
}

TEST_CASE("layer descriptions and kinds") {
  CHECK(Conv1d(300, 32, 5, Activation::Relu).describe() == "conv1d(32,k5)");
  CHECK(MaxPool1d(3).describe() == "maxpool1d(3)");
  CHECK(layer_kind_name(LayerKind::AttentionContext) == "attention_context");
  CHECK(make_bigru(4, 128)->describe() == "bigru(128)");
  CHECK(parse_activation("relu") == Activation::Relu);
  CHECK_THROWS(parse_activation("swish"));
}
