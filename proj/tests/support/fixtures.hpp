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
#include <filesystem>
#include <string>
#include <vector>

#include "protestlens/corpus.hpp"
#include "protestlens/embeddings.hpp"
#include "protestlens/features.hpp"
#include "protestlens/preprocess.hpp"
#include "protestlens/rng.hpp"

namespace protestlens::testing {

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// Uniform matrix in [lo, hi).
Tensor2 random_matrix(std::size_t rows, std::size_t cols, CounterRng& rng, double lo = -1.0,
                      double hi = 1.0);

// Two Gaussian clusters along a random direction, flattened positions x dim
// rows. n_protest of n rows carry label 1.
FeatureMatrix separable_features(std::size_t n, std::size_t n_protest, std::size_t positions,
                                 std::size_t dim, std::uint64_t seed, double margin = 2.0);

// Text corpus whose protest documents draw from a protest vocabulary and
// the rest from a non-protest vocabulary, both mixed with shared filler.
struct SyntheticCorpus {
  Dataset data;
  VectorTable vectors;
};
SyntheticCorpus synthetic_corpus(std::size_t n, std::size_t n_protest, std::size_t dim,
                                 std::uint64_t seed, std::size_t min_len = 6,
                                 std::size_t max_len = 20);

void write_dataset(const std::filesystem::path& path, const Dataset& data);

// Random tagged token sequence mixing stopwords, mixed-case words,
// inflections, numbers, punctuation and non-ASCII text.
TokenSequence random_token_sequence(CounterRng& rng, std::size_t max_len = 30);

}  // namespace protestlens::testing
