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
#include <vector>

#include "protestlens/features.hpp"

namespace protestlens {

// Indices of the k rows of `rows` nearest to row i in Euclidean distance,
// excluding i itself, closest first; ties go to the lower index. Throws
// DomainError when k >= rows.rows().
std::vector<std::size_t> nearest_neighbors(const Tensor2& rows, std::size_t i, std::size_t k);

struct SyntheticOrigin {
  std::size_t seed_row;      // row index in the input matrix
  std::size_t neighbor_row;  // row index in the input matrix
  double lambda;
};

struct SmoteResult {
  FeatureMatrix features;  // originals first, then synthetic rows
  std::vector<SyntheticOrigin> origins;  // one per synthetic row
};

// Oversamples the minority class to exact parity. Each synthetic row is
// x + lambda (x_nn - x), with x a uniformly drawn minority row, x_nn one of
// its k nearest minority neighbours drawn uniformly, and lambda ~ U[0, 1].
// Deterministic given seed; an already balanced input is returned as is.
SmoteResult smote_with_origins(const FeatureMatrix& data, std::size_t k = 5,
                               std::uint64_t seed = 42);

FeatureMatrix smote(const FeatureMatrix& data, std::size_t k = 5, std::uint64_t seed = 42);

}  // namespace protestlens
