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
#include <string_view>
#include <vector>

#include "protestlens/nn/tensor.hpp"
#include "protestlens/rng.hpp"

namespace protestlens::nn {

enum class LayerKind {
  Dense,
  Conv1d,
  MaxPool1d,
  Flatten,
  Gru,
  Lstm,
  Bidirectional,
  AttentionContext,
  Sigmoid,
  Relu,
};

std::string_view layer_kind_name(LayerKind kind);

// Activations recorded by a forward pass and consumed by backward().
struct Tape {
  bool recorded = false;
  std::vector<Tensor2> saved;
  std::vector<std::size_t> index;
  std::vector<Tape> children;
};

// A differentiable layer. Layers are immutable during forward/backward: all
// per-call state lives in the Tape and parameter gradients are accumulated
// into caller-owned buffers, so one layer may serve many threads at once.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  // Human-readable hyperparameter summary, e.g. "conv1d(32,k5)".
  virtual std::string describe() const = 0;
  // Throws ShapeError when the input shape is not accepted.
  virtual Shape output_shape(Shape input) const = 0;

  // tape may be null for inference.
  virtual Tensor2 forward(const Tensor2& x, Tape* tape) const = 0;
  // Adds dL/dparam into grads (one entry per parameter, same order as
  // parameters()) and returns dL/dx. Throws if the tape was never recorded.
  virtual Tensor2 backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2> grads) const = 0;

  virtual std::vector<Tensor2*> parameters() { return {}; }
  std::vector<const Tensor2*> parameters() const;
  virtual std::vector<std::string> parameter_names() const { return {}; }
  std::size_t parameter_count() const { return parameter_names().size(); }

  virtual void initialize(CounterRng& /*rng*/) {}
  virtual std::unique_ptr<Layer> clone() const = 0;

  // Discrete branch decisions (argmax positions, ReLU signs) taken by the
  // recorded pass. Gradient checking skips coordinates whose perturbation
  // changes the signature.
  virtual std::vector<std::size_t> branch_signature(const Tape& /*tape*/) const { return {}; }
};

using LayerPtr = std::unique_ptr<Layer>;

// Parameters stored inline; most layers derive from this.
class ParamLayer : public Layer {
 public:
  std::vector<Tensor2*> parameters() override;
  std::vector<std::string> parameter_names() const override { return names_; }

 protected:
  Tensor2& add_param(std::string name, std::size_t rows, std::size_t cols);
  Tensor2& param(std::size_t i) { return params_[i]; }
  const Tensor2& param(std::size_t i) const { return params_[i]; }

 private:
  std::vector<Tensor2> params_;
  std::vector<std::string> names_;
};

void require_tape(const Tape& tape, std::string_view layer);

// y = a(x W^T + b), applied to each row of x.
class Dense final : public ParamLayer {
 public:
  Dense(std::size_t in, std::size_t out, Activation act = Activation::Identity);

  LayerKind kind() const override { return LayerKind::Dense; }
  std::string describe() const override;
  Shape output_shape(Shape input) const override;
  Tensor2 forward(const Tensor2& x, Tape* tape) const override;
  Tensor2 backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2> grads) const override;
  void initialize(CounterRng& rng) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }
  std::vector<std::size_t> branch_signature(const Tape& tape) const override;

  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }
  Activation activation() const { return act_; }
  Tensor2& weight() { return param(0); }
  Tensor2& bias() { return param(1); }
  const Tensor2& weight() const { return param(0); }
  const Tensor2& bias() const { return param(1); }

 private:
  std::size_t in_;
  std::size_t out_;
  Activation act_;
};

// Valid (unpadded) 1-D cross-correlation over positions. Filter f is stored
// as row f of a F x (k*d) matrix, kernel row-major (position, channel).
class Conv1d final : public ParamLayer {
 public:
  Conv1d(std::size_t channels, std::size_t filters, std::size_t kernel,
         Activation act = Activation::Identity);

  LayerKind kind() const override { return LayerKind::Conv1d; }
  std::string describe() const override;
  Shape output_shape(Shape input) const override;
  Tensor2 forward(const Tensor2& x, Tape* tape) const override;
  Tensor2 backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2> grads) const override;
  void initialize(CounterRng& rng) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv1d>(*this); }
  std::vector<std::size_t> branch_signature(const Tape& tape) const override;

  std::size_t channels() const { return channels_; }
  std::size_t filters() const { return filters_; }
  std::size_t kernel() const { return kernel_; }
  Tensor2& weight() { return param(0); }
  Tensor2& bias() { return param(1); }
  const Tensor2& weight() const { return param(0); }
  const Tensor2& bias() const { return param(1); }

 private:
  std::size_t channels_;
  std::size_t filters_;
  std::size_t kernel_;
  Activation act_;
};

// Non-overlapping max pooling over positions; a trailing remainder shorter
// than the window is dropped.
class MaxPool1d final : public Layer {
 public:
  explicit MaxPool1d(std::size_t window);

  LayerKind kind() const override { return LayerKind::MaxPool1d; }
  std::string describe() const override;
  Shape output_shape(Shape input) const override;
  Tensor2 forward(const Tensor2& x, Tape* tape) const override;
  Tensor2 backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2> grads) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool1d>(*this); }
  std::vector<std::size_t> branch_signature(const Tape& tape) const override;

  std::size_t window() const { return window_; }

 private:
  std::size_t window_;
};

// L x F -> 1 x (L*F), row-major order.
class Flatten final : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::Flatten; }
  std::string describe() const override { return "flatten"; }
  Shape output_shape(Shape input) const override;
  Tensor2 forward(const Tensor2& x, Tape* tape) const override;
  Tensor2 backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2> grads) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }
};

// Standalone elementwise activation (kinds sigmoid and relu).
class ActivationLayer final : public Layer {
 public:
  explicit ActivationLayer(Activation act);

  LayerKind kind() const override;
  std::string describe() const override;
  Shape output_shape(Shape input) const override { return input; }
  Tensor2 forward(const Tensor2& x, Tape* tape) const override;
  Tensor2 backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2> grads) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<ActivationLayer>(*this); }
  std::vector<std::size_t> branch_signature(const Tape& tape) const override;

 private:
  Activation act_;
};

// Free-function forms of the single-layer operations.
RowVector dense_forward(const RowVector& x, const Tensor2& w, const RowVector& b, Activation act);
Tensor2 conv1d_forward(const Tensor2& x, const Tensor2& filters, const RowVector& bias, std::size_t kernel);
Tensor2 maxpool1d_forward(const Tensor2& x, std::size_t window);

}  // namespace protestlens::nn
