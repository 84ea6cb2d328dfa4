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
#include "protestlens/nn/layers.hpp"

#include <string>

#include "protestlens/error.hpp"

namespace protestlens::nn {

namespace {

using StridedRows = Eigen::Map<const Tensor2, 0, Eigen::OuterStride<>>;

// Overlapping k-row windows of x viewed as one row each, no copy.
StridedRows patches_of(const Tensor2& x, std::size_t kernel) {
  const auto d = x.cols();
  const auto out_len = x.rows() - static_cast<Eigen::Index>(kernel) + 1;
  return StridedRows(x.data(), out_len, static_cast<Eigen::Index>(kernel) * d,
                     Eigen::OuterStride<>(d));
}

std::vector<std::size_t> positive_mask(const Tensor2& y) {
  std::vector<std::size_t> mask(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) mask[i] = y.data()[i] > 0.0 ? 1 : 0;
  return mask;
}

}  // namespace

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Conv1d: return "conv1d";
    case LayerKind::MaxPool1d: return "maxpool1d";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Gru: return "gru";
    case LayerKind::Lstm: return "lstm";
    case LayerKind::Bidirectional: return "bidirectional";
    case LayerKind::AttentionContext: return "attention_context";
    case LayerKind::Sigmoid: return "sigmoid";
    case LayerKind::Relu: return "relu";
  }
  return "unknown";
}

std::vector<const Tensor2*> Layer::parameters() const {
  auto mutable_params = const_cast<Layer*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

std::vector<Tensor2*> ParamLayer::parameters() {
  std::vector<Tensor2*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(&p);
  return out;
}

Tensor2& ParamLayer::add_param(std::string name, std::size_t rows, std::size_t cols) {
  names_.push_back(std::move(name));
  params_.push_back(Tensor2::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)));
  return params_.back();
}

void require_tape(const Tape& tape, std::string_view layer) {
  if (!tape.recorded)
    throw Error(std::string(layer) + ": backward called without a recorded forward pass");
}

// ---------------------------------------------------------------- Dense

Dense::Dense(std::size_t in, std::size_t out, Activation act) : in_(in), out_(out), act_(act) {
  if (in == 0 || out == 0) throw ConfigError("dense: sizes must be positive");
  add_param("weight", out, in);
  add_param("bias", 1, out);
}

std::string Dense::describe() const {
  std::string s = "dense(" + std::to_string(out_);
  if (act_ != Activation::Identity) s += "," + std::string(activation_name(act_));
  return s + ")";
}

Shape Dense::output_shape(Shape input) const {
  if (input.cols != in_)
    throw ShapeError("dense: expected " + std::to_string(in_) + " input features, got " +
                     input.str());
  return {input.rows, out_};
}

Tensor2 Dense::forward(const Tensor2& x, Tape* tape) const {
  output_shape(shape_of(x));
  Tensor2 pre = x * weight().transpose();
  pre.rowwise() += bias().row(0);
  Tensor2 y = activate(pre, act_);
  if (tape) {
    tape->saved = {x, y};
    tape->recorded = true;
  }
  return y;
}

Tensor2 Dense::backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2> grads) const {
  require_tape(tape, "dense");
  const Tensor2& x = tape.saved[0];
  const Tensor2 dpre = activation_backward(dy, tape.saved[1], act_);
  grads[0].noalias() += dpre.transpose() * x;
  grads[1] += dpre.colwise().sum();
  return dpre * weight();
}

void Dense::initialize(CounterRng& rng) {
  glorot_uniform(weight(), in_, out_, rng);
  bias().setZero();
}

std::vector<std::size_t> Dense::branch_signature(const Tape& tape) const {
  if (act_ != Activation::Relu || !tape.recorded) return {};
  return positive_mask(tape.saved[1]);
}

RowVector dense_forward(const RowVector& x, const Tensor2& w, const RowVector& b, Activation act) {
  if (w.cols() != x.cols() || w.rows() != b.cols())
    throw ShapeError("dense_forward: W is " + shape_of(w).str() + ", x has " +
                     std::to_string(x.cols()) + " entries, b has " + std::to_string(b.cols()));
  Tensor2 pre = x * w.transpose() + b;
  return activate(pre, act).row(0);
}

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(std::size_t channels, std::size_t filters, std::size_t kernel, Activation act)
    : channels_(channels), filters_(filters), kernel_(kernel), act_(act) {
  if (channels == 0 || filters == 0 || kernel == 0)
    throw ConfigError("conv1d: sizes must be positive");
  add_param("weight", filters, kernel * channels);
  add_param("bias", 1, filters);
}

std::string Conv1d::describe() const {
  return "conv1d(" + std::to_string(filters_) + ",k" + std::to_string(kernel_) + ")";
}

Shape Conv1d::output_shape(Shape input) const {
  if (input.cols != channels_)
    throw ShapeError("conv1d: expected " + std::to_string(channels_) + " channels, got " +
                     input.str());
  if (input.rows < kernel_)
    throw ShapeError("conv1d: sequence length " + std::to_string(input.rows) +
                     " shorter than kernel " + std::to_string(kernel_));
  return {input.rows - kernel_ + 1, filters_};
}

Tensor2 Conv1d::forward(const Tensor2& x, Tape* tape) const {
  output_shape(shape_of(x));
  Tensor2 pre = patches_of(x, kernel_) * weight().transpose();
  pre.rowwise() += bias().row(0);
  Tensor2 y = activate(pre, act_);
  if (tape) {
    tape->saved = {x, y};
    tape->recorded = true;
  }
  return y;
}

Tensor2 Conv1d::backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2> grads) const {
  require_tape(tape, "conv1d");
  const Tensor2& x = tape.saved[0];
  const Tensor2 dpre = activation_backward(dy, tape.saved[1], act_);
  const auto patches = patches_of(x, kernel_);
  grads[0].noalias() += dpre.transpose() * patches;
  grads[1] += dpre.colwise().sum();
  const Tensor2 dpatches = dpre * weight();
  Tensor2 dx = Tensor2::Zero(x.rows(), x.cols());
  const auto width = static_cast<Eigen::Index>(kernel_) * x.cols();
  for (Eigen::Index t = 0; t < dpatches.rows(); ++t)
    Eigen::Map<RowVector>(dx.data() + t * x.cols(), width) += dpatches.row(t);
  return dx;
}

void Conv1d::initialize(CounterRng& rng) {
  // Keras convention: fan_in = k * d, fan_out = k * F.
  glorot_uniform(weight(), kernel_ * channels_, kernel_ * filters_, rng);
  bias().setZero();
}

std::vector<std::size_t> Conv1d::branch_signature(const Tape& tape) const {
  if (act_ != Activation::Relu || !tape.recorded) return {};
  return positive_mask(tape.saved[1]);
}

Tensor2 conv1d_forward(const Tensor2& x, const Tensor2& filters, const RowVector& bias,
                       std::size_t kernel) {
  if (kernel == 0 || filters.cols() != static_cast<Eigen::Index>(kernel) * x.cols() ||
      bias.cols() != filters.rows())
    throw ShapeError("conv1d_forward: filters " + shape_of(filters).str() +
                     " do not match kernel " + std::to_string(kernel) + " over " +
                     std::to_string(x.cols()) + " channels");
  if (static_cast<std::size_t>(x.rows()) < kernel)
    throw ShapeError("conv1d_forward: sequence length " + std::to_string(x.rows()) +
                     " shorter than kernel " + std::to_string(kernel));
  Tensor2 y = patches_of(x, kernel) * filters.transpose();
  y.rowwise() += bias;
  return y;
}

// ---------------------------------------------------------------- MaxPool1d

MaxPool1d::MaxPool1d(std::size_t window) : window_(window) {
  if (window == 0) throw ConfigError("maxpool1d: window must be positive");
}

std::string MaxPool1d::describe() const { return "maxpool1d(" + std::to_string(window_) + ")"; }

Shape MaxPool1d::output_shape(Shape input) const {
  if (input.rows < window_)
    throw ShapeError("maxpool1d: sequence length " + std::to_string(input.rows) +
                     " shorter than window " + std::to_string(window_));
  return {input.rows / window_, input.cols};
}

Tensor2 MaxPool1d::forward(const Tensor2& x, Tape* tape) const {
  const Shape out_shape = output_shape(shape_of(x));
  Tensor2 y(out_shape.rows, out_shape.cols);
  std::vector<std::size_t> argmax(out_shape.rows * out_shape.cols);
  for (std::size_t j = 0; j < out_shape.rows; ++j) {
    for (std::size_t c = 0; c < out_shape.cols; ++c) {
      std::size_t best = j * window_;
      for (std::size_t t = best + 1; t < (j + 1) * window_; ++t)
        if (x(t, c) > x(best, c)) best = t;
      y(j, c) = x(best, c);
      argmax[j * out_shape.cols + c] = best;
    }
  }
  if (tape) {
    tape->saved = {Tensor2::Zero(x.rows(), x.cols())};
    tape->index = std::move(argmax);
    tape->recorded = true;
  }
  return y;
}

Tensor2 MaxPool1d::backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2>) const {
  require_tape(tape, "maxpool1d");
  Tensor2 dx = tape.saved[0];
  const auto cols = static_cast<std::size_t>(dy.cols());
  for (Eigen::Index j = 0; j < dy.rows(); ++j)
    for (std::size_t c = 0; c < cols; ++c)
      dx(static_cast<Eigen::Index>(tape.index[j * cols + c]), c) += dy(j, c);
  return dx;
}

std::vector<std::size_t> MaxPool1d::branch_signature(const Tape& tape) const { return tape.index; }

Tensor2 maxpool1d_forward(const Tensor2& x, std::size_t window) {
  return MaxPool1d(window).forward(x, nullptr);
}

// ---------------------------------------------------------------- Flatten

Shape Flatten::output_shape(Shape input) const { return {1, input.rows * input.cols}; }

Tensor2 Flatten::forward(const Tensor2& x, Tape* tape) const {
  if (tape) {
    tape->index = {static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(x.cols())};
    tape->recorded = true;
  }
  return Eigen::Map<const Tensor2>(x.data(), 1, x.size());
}

Tensor2 Flatten::backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2>) const {
  require_tape(tape, "flatten");
  return Eigen::Map<const Tensor2>(dy.data(), static_cast<Eigen::Index>(tape.index[0]),
                                   static_cast<Eigen::Index>(tape.index[1]));
}

// ---------------------------------------------------------------- Activation

ActivationLayer::ActivationLayer(Activation act) : act_(act) {
  if (act != Activation::Sigmoid && act != Activation::Relu)
    throw ConfigError("activation layer supports sigmoid and relu only");
}

LayerKind ActivationLayer::kind() const {
  return act_ == Activation::Sigmoid ? LayerKind::Sigmoid : LayerKind::Relu;
}

std::string ActivationLayer::describe() const { return std::string(activation_name(act_)); }

Tensor2 ActivationLayer::forward(const Tensor2& x, Tape* tape) const {
  Tensor2 y = activate(x, act_);
  if (tape) {
    tape->saved = {y};
    tape->recorded = true;
  }
  return y;
}

Tensor2 ActivationLayer::backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2>) const {
  require_tape(tape, describe());
  return activation_backward(dy, tape.saved[0], act_);
}

std::vector<std::size_t> ActivationLayer::branch_signature(const Tape& tape) const {
  if (act_ != Activation::Relu || !tape.recorded) return {};
  return positive_mask(tape.saved[0]);
}

}  // namespace protestlens::nn
