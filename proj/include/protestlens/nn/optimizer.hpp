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
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "protestlens/nn/tensor.hpp"

namespace protestlens::nn {

enum class OptimizerKind { RmsProp, Adam };

std::string_view optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 0.001;
  double rho = 0.9;      // RMSProp decay
  double beta1 = 0.9;    // Adam
  double beta2 = 0.999;  // Adam
  double epsilon = 1e-8;

  // lr 0.001, rho 0.9, eps 1e-7.
  static OptimizerConfig rmsprop(double lr = 0.001);
  // lr 0.001, betas 0.9 / 0.999, eps 1e-8.
  static OptimizerConfig adam(double lr = 0.001);
};

// Per-parameter accumulators for RMSProp (squared-gradient cache) and Adam
// (first/second moments). Each parameter keeps its own step count so that a
// parameter left out of an update is not touched at all.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, std::span<const Shape> parameter_shapes);

  // Updates params[i] with grads[i] for every i in `active` (all when
  // empty). Throws DivergenceError on any non-finite gradient, before any
  // parameter is modified.
  void step(std::span<Tensor2* const> params, std::span<const Tensor2> grads,
            std::span<const std::size_t> active = {});

  const OptimizerConfig& config() const { return config_; }
  std::uint64_t step_count(std::size_t param) const { return steps_[param]; }
  const Tensor2& first_moment(std::size_t param) const { return first_[param]; }
  const Tensor2& second_moment(std::size_t param) const { return second_[param]; }

 private:
  void update(std::size_t i, Tensor2& param, const Tensor2& grad);

  OptimizerConfig config_;
  std::vector<Tensor2> first_;   // Adam m
  std::vector<Tensor2> second_;  // RMSProp cache / Adam v
  std::vector<std::uint64_t> steps_;
};

}  // namespace protestlens::nn
