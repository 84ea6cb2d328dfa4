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
#include "protestlens/nn/optimizer.hpp"

#include <cmath>
#include <string>

#include "protestlens/error.hpp"

namespace protestlens::nn {

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::RmsProp ? "rmsprop" : "adam";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "rmsprop") return OptimizerKind::RmsProp;
  if (name == "adam") return OptimizerKind::Adam;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

OptimizerConfig OptimizerConfig::rmsprop(double lr) {
  OptimizerConfig c;
  c.kind = OptimizerKind::RmsProp;
  c.learning_rate = lr;
  c.rho = 0.9;
  c.epsilon = 1e-7;
  return c;
}

OptimizerConfig OptimizerConfig::adam(double lr) {
  OptimizerConfig c;
  c.kind = OptimizerKind::Adam;
  c.learning_rate = lr;
  c.beta1 = 0.9;
  c.beta2 = 0.999;
  c.epsilon = 1e-8;
  return c;
}

Optimizer::Optimizer(OptimizerConfig config, std::span<const Shape> parameter_shapes)
    : config_(config), steps_(parameter_shapes.size(), 0) {
  for (const Shape& s : parameter_shapes) {
    const auto r = static_cast<Eigen::Index>(s.rows);
    const auto c = static_cast<Eigen::Index>(s.cols);
    second_.push_back(Tensor2::Zero(r, c));
    first_.push_back(config_.kind == OptimizerKind::Adam ? Tensor2::Zero(r, c) : Tensor2());
  }
}

void Optimizer::step(std::span<Tensor2* const> params, std::span<const Tensor2> grads,
                     std::span<const std::size_t> active) {
  if (params.size() != steps_.size() || grads.size() != steps_.size())
    throw ShapeError("optimizer: expected " + std::to_string(steps_.size()) + " parameters");
  auto check = [&](std::size_t i) {
    if (shape_of(*params[i]) != shape_of(second_[i]) || shape_of(grads[i]) != shape_of(second_[i]))
      throw ShapeError("optimizer: shape mismatch for parameter " + std::to_string(i));
    if (!grads[i].allFinite())
      throw DivergenceError("optimizer: non-finite gradient for parameter " + std::to_string(i));
  };
  if (active.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) check(i);
    for (std::size_t i = 0; i < params.size(); ++i) update(i, *params[i], grads[i]);
  } else {
    for (std::size_t i : active) check(i);
    for (std::size_t i : active) update(i, *params[i], grads[i]);
  }
}

void Optimizer::update(std::size_t i, Tensor2& param, const Tensor2& grad) {
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  ++steps_[i];
  auto v = second_[i].array();
  const auto g = grad.array();
  if (config_.kind == OptimizerKind::RmsProp) {
    v = config_.rho * v + (1.0 - config_.rho) * g.square();
    param.array() -= lr * g / (v.sqrt() + eps);
    return;
  }
  auto m = first_[i].array();
  m = config_.beta1 * m + (1.0 - config_.beta1) * g;
  v = config_.beta2 * v + (1.0 - config_.beta2) * g.square();
  const double t = static_cast<double>(steps_[i]);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  param.array() -= lr * (m / c1) / ((v / c2).sqrt() + eps);
}

}  // namespace protestlens::nn
