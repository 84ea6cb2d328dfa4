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
#include <memory>
#include <span>
#include <string>

#include "protestlens/nn/layers.hpp"

namespace protestlens::nn {

// Attention with a learned context vector over L hidden states (L x h):
//   u_t = tanh(W h_t + b),  alpha = softmax_t(u_t . u_c),  out = sum_t alpha_t h_t
// Output is 1 x h.
class AttentionContext final : public ParamLayer {
 public:
  explicit AttentionContext(std::size_t hidden);

  LayerKind kind() const override { return LayerKind::AttentionContext; }
  std::string describe() const override;
  Shape output_shape(Shape input) const override;
  Tensor2 forward(const Tensor2& x, Tape* tape) const override;
  Tensor2 backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2> grads) const override;
  void initialize(CounterRng& rng) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<AttentionContext>(*this); }

  // Attention weights alpha for the given hidden states.
  RowVector weights(const Tensor2& hidden_states) const;

  std::size_t hidden_size() const { return hidden_; }
  Tensor2& projection() { return param(0); }  // h x h
  Tensor2& bias() { return param(1); }        // 1 x h
  Tensor2& context() { return param(2); }     // 1 x h

 private:
  std::size_t hidden_;
};

}  // namespace protestlens::nn
