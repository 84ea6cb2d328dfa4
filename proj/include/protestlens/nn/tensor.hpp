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
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "protestlens/rng.hpp"

namespace protestlens::nn {

// Row-major double matrix. Sequences are stored one position per row.
using Tensor2 = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor>;

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  bool operator==(const Shape&) const = default;
  std::string str() const;
};

inline Shape shape_of(const Tensor2& t) {
  return {static_cast<std::size_t>(t.rows()), static_cast<std::size_t>(t.cols())};
}

bool all_finite(const Tensor2& t);

enum class Activation { Identity, Relu, Sigmoid, Tanh };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

double sigmoid(double z);

// Applies the activation elementwise.
Tensor2 activate(const Tensor2& pre, Activation a);

// Given dL/dy and y = a(pre), returns dL/dpre. All supported activations
// have derivatives expressible through their output.
Tensor2 activation_backward(const Tensor2& dy, const Tensor2& y, Activation a);

// Glorot/Xavier uniform: U(-sqrt(6/(fan_in+fan_out)), +sqrt(...)).
void glorot_uniform(Tensor2& w, std::size_t fan_in, std::size_t fan_out, CounterRng& rng);

}  // namespace protestlens::nn
