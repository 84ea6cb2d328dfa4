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
#include "protestlens/nn/attention.hpp"

#include <string>

#include "protestlens/error.hpp"

namespace protestlens::nn {

namespace {

// Numerically stable softmax over a row.
RowVector softmax(const RowVector& s) {
  const double m = s.maxCoeff();
  RowVector e = (s.array() - m).exp().matrix();
  return e / e.sum();
}

}  // namespace

AttentionContext::AttentionContext(std::size_t hidden) : hidden_(hidden) {
  if (hidden == 0) throw ConfigError("attention_context: size must be positive");
  add_param("projection", hidden, hidden);
  add_param("bias", 1, hidden);
  add_param("context", 1, hidden);
}

std::string AttentionContext::describe() const {
  return "attention_context(" + std::to_string(hidden_) + ")";
}

Shape AttentionContext::output_shape(Shape input) const {
  if (input.cols != hidden_)
    throw ShapeError("attention_context: expected " + std::to_string(hidden_) +
                     " features, got " + input.str());
  if (input.rows == 0) throw ShapeError("attention_context: empty sequence");
  return {1, hidden_};
}

RowVector AttentionContext::weights(const Tensor2& hidden_states) const {
  output_shape(shape_of(hidden_states));
  Tensor2 u = hidden_states * param(0).transpose();
  u.rowwise() += param(1).row(0);
  u = u.array().tanh().matrix();
  const RowVector scores = (u * param(2).row(0).transpose()).transpose();
  return softmax(scores);
}

Tensor2 AttentionContext::forward(const Tensor2& x, Tape* tape) const {
  output_shape(shape_of(x));
  Tensor2 u = x * param(0).transpose();
  u.rowwise() += param(1).row(0);
  u = u.array().tanh().matrix();
  const RowVector alpha = softmax((u * param(2).row(0).transpose()).transpose());
  Tensor2 out = alpha * x;
  if (tape) {
    tape->saved = {x, u, alpha};
    tape->recorded = true;
  }
  return out;
}

Tensor2 AttentionContext::backward(const Tape& tape, const Tensor2& dy,
                                   std::span<Tensor2> grads) const {
  require_tape(tape, "attention_context");
  const Tensor2& x = tape.saved[0];
  const Tensor2& u = tape.saved[1];
  const RowVector alpha = tape.saved[2].row(0);

  // out = alpha x: dx gets alpha_t * dy per row, dalpha_t = x_t . dy.
  Tensor2 dx = alpha.transpose() * dy.row(0);
  const RowVector dalpha = (x * dy.row(0).transpose()).transpose();
  const double mean = alpha.dot(dalpha);
  const RowVector dscore = (alpha.array() * (dalpha.array() - mean)).matrix();

  // score_t = u_t . context
  grads[2] += dscore * u;
  const Tensor2 du = dscore.transpose() * param(2).row(0);
  const Tensor2 dpre = (du.array() * (1.0 - u.array().square())).matrix();
  grads[0].noalias() += dpre.transpose() * x;
  grads[1] += dpre.colwise().sum();
  dx.noalias() += dpre * param(0);
  return dx;
}

void AttentionContext::initialize(CounterRng& rng) {
  glorot_uniform(projection(), hidden_, hidden_, rng);
  bias().setZero();
  glorot_uniform(context(), hidden_, 1, rng);
}

}  // namespace protestlens::nn
