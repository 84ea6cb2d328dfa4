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
#include <filesystem>
#include <string>
#include <vector>

#include "protestlens/embeddings.hpp"

namespace protestlens {

inline constexpr int kUnlabeled = -1;

// N embedded examples flattened row-wise to N x (positions * dim).
struct FeatureMatrix {
  Tensor2 rows;
  std::vector<int> labels;  // 0, 1, or kUnlabeled
  std::vector<std::string> ids;
  std::size_t positions = 0;
  std::size_t dim = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t width() const { return positions * dim; }

  // Example i reshaped to positions x dim.
  Tensor2 example(std::size_t i) const;
  void append(const std::string& id, int label, const EmbeddedSequence& seq);
  std::size_t count(int label) const;
  // Throws when shapes are inconsistent or entries are non-finite.
  void validate() const;
};

// File layout: one line of JSON header
//   {"format":"protestlens-features","version":1,"rows":N,"positions":L,
//    "dim":d,"ids":[...],"labels":[...]}
// then N * L * d little-endian 64-bit floats, row-major.
void write_features(const std::filesystem::path& path, const FeatureMatrix& features);
FeatureMatrix read_features(const std::filesystem::path& path);

// Little-endian float64 helpers shared by the feature and checkpoint formats.
void write_f64_le(std::ostream& out, const double* data, std::size_t n);
void read_f64_le(std::istream& in, double* data, std::size_t n);

}  // namespace protestlens
