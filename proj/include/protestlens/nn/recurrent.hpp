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
#include <utility>
#include <vector>

#include "protestlens/nn/layers.hpp"

namespace protestlens::nn {

// Gated recurrent unit over a sequence, returning every hidden state (L x H).
// Gates are stacked [update z; reset r; candidate] in the parameters:
//   z = sigma(Wz x + Uz h + bz)
//   r = sigma(Wr x + Ur h + br)
//   c = tanh(Wc x + Uc (r * h) + bc)
//   h' = (1 - z) * h + z * c
// The initial state is zero.
class Gru final : public ParamLayer {
 public:
  Gru(std::size_t input, std::size_t hidden);

  LayerKind kind() const override { return LayerKind::Gru; }
  std::string describe() const override;
  Shape output_shape(Shape input) const override;
  Tensor2 forward(const Tensor2& x, Tape* tape) const override;
  Tensor2 backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2> grads) const override;
  void initialize(CounterRng& rng) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Gru>(*this); }

  // One step of the cell.
  RowVector step(const RowVector& x, const RowVector& h_prev) const;

  std::size_t input_size() const { return input_; }
  std::size_t hidden_size() const { return hidden_; }
  Tensor2& input_weight() { return param(0); }      // 3H x d
  Tensor2& recurrent_weight() { return param(1); }  // 3H x H
  Tensor2& bias() { return param(2); }              // 1 x 3H

 private:
  std::size_t input_;
  std::size_t hidden_;
};

// LSTM without peepholes, returning every hidden state (L x H). Gates are
// stacked [input i; forget f; cell g; output o]:
//   c' = f * c + i * g,  h' = o * tanh(c')
// No further activation is applied to h'.
class Lstm final : public ParamLayer {
 public:
  Lstm(std::size_t input, std::size_t hidden);

  LayerKind kind() const override { return LayerKind::Lstm; }
  std::string describe() const override;
  Shape output_shape(Shape input) const override;
  Tensor2 forward(const Tensor2& x, Tape* tape) const override;
  Tensor2 backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2> grads) const override;
  void initialize(CounterRng& rng) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Lstm>(*this); }

  // One step of the cell; returns (h, c).
  std::pair<RowVector, RowVector> step(const RowVector& x, const RowVector& h_prev,
                                       const RowVector& c_prev) const;

  std::size_t input_size() const { return input_; }
  std::size_t hidden_size() const { return hidden_; }
  Tensor2& input_weight() { return param(0); }      // 4H x d
  Tensor2& recurrent_weight() { return param(1); }  // 4H x H
  Tensor2& bias() { return param(2); }              // 1 x 4H

 private:
  std::size_t input_;
  std::size_t hidden_;
};

// Runs an independent copy of a recurrent layer forward over t = 1..L and
// another backward over t = L..1.
//
// Sequence output: row t is [fwd_t, bwd_t], L x 2H.
// Final output (return_sequences = false): [fwd_L, bwd_1], the state each
// direction holds after consuming the full sequence, 1 x 2H.
class Bidirectional final : public Layer {
 public:
  Bidirectional(LayerPtr forward_layer, LayerPtr backward_layer, bool return_sequences);

  LayerKind kind() const override { return LayerKind::Bidirectional; }
  std::string describe() const override;
  Shape output_shape(Shape input) const override;
  Tensor2 forward(const Tensor2& x, Tape* tape) const override;
  Tensor2 backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2> grads) const override;
  std::vector<Tensor2*> parameters() override;
  std::vector<std::string> parameter_names() const override;
  void initialize(CounterRng& rng) override;
  std::unique_ptr<Layer> clone() const override;

  const Layer& forward_layer() const { return *fwd_; }
  const Layer& backward_layer() const { return *bwd_; }
  Layer& forward_layer() { return *fwd_; }
  Layer& backward_layer() { return *bwd_; }
  bool return_sequences() const { return return_sequences_; }
  std::size_t hidden_size() const { return hidden_; }

 private:
  LayerPtr fwd_;
  LayerPtr bwd_;
  bool return_sequences_;
  std::size_t hidden_;
};

std::unique_ptr<Bidirectional> make_bigru(std::size_t input, std::size_t hidden,
                                          bool return_sequences = true);
std::unique_ptr<Bidirectional> make_bilstm(std::size_t input, std::size_t hidden,
                                           bool return_sequences = true);

}  // namespace protestlens::nn
