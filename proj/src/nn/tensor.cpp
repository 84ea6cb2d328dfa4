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
#include "protestlens/nn/tensor.hpp"

#include <cmath>

#include "protestlens/error.hpp"

namespace protestlens::nn {

std::string Shape::str() const {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

bool all_finite(const Tensor2& t) { return t.allFinite(); }

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "identity" || name == "linear") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Tensor2 activate(const Tensor2& pre, Activation a) {
  switch (a) {
    case Activation::Identity: return pre;
    case Activation::Relu: return pre.cwiseMax(0.0);
    case Activation::Sigmoid: return pre.unaryExpr([](double z) { return sigmoid(z); });
    case Activation::Tanh: return pre.array().tanh().matrix();
  }
  return pre;
}

Tensor2 activation_backward(const Tensor2& dy, const Tensor2& y, Activation a) {
  switch (a) {
    case Activation::Identity: return dy;
    case Activation::Relu:
      return (y.array() > 0.0).select(dy.array(), 0.0).matrix();
    case Activation::Sigmoid:
      return (dy.array() * y.array() * (1.0 - y.array())).matrix();
    case Activation::Tanh:
      return (dy.array() * (1.0 - y.array().square())).matrix();
  }
  return dy;
}

void glorot_uniform(Tensor2& w, std::size_t fan_in, std::size_t fan_out, CounterRng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-limit, limit);
}

}  // namespace protestlens::nn
