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
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

#include "protestlens/nn/tensor.hpp"
#include "protestlens/preprocess.hpp"

namespace protestlens {

using nn::Tensor2;

// Reserved padding token; never looked up in a vector table.
inline constexpr std::string_view kPadToken = "<pad>";

// L x d matrix of token vectors, one position per row.
struct EmbeddedSequence {
  Tensor2 vectors;

  std::size_t positions() const { return static_cast<std::size_t>(vectors.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
};

enum class Task { Task1, Task2 };
enum class Provider { Static, Remote };

std::string_view task_name(Task task);
Task parse_task(std::string_view name);
std::string_view provider_name(Provider provider);
Provider parse_provider(std::string_view name);

struct EmbedConfig {
  std::size_t max_tokens = 800;     // L_in
  std::size_t out_positions = 256;  // L_out
  std::size_t dim = 0;              // d
  Provider provider = Provider::Static;

  // (800, 256) for documents, (100, 32) for sentences.
  static EmbedConfig for_task(Task task, std::size_t dim, Provider provider = Provider::Static);
  // Throws ConfigError unless 0 < L_out <= L_in and d > 0.
  void validate() const;
};

// Exactly L_in tokens: the tail is truncated, or PAD tokens appended.
// Tags, when present, are padded with PUNCT.
TokenSequence pad_or_truncate(const TokenSequence& tokens, std::size_t max_tokens);

// Static token -> vector table.
class VectorTable {
 public:
  VectorTable() = default;
  explicit VectorTable(std::size_t dim) : dim_(dim) {}

  // Text format "token v1 ... vd", one token per line. A leading
  // "count dim" header line (word2vec / fastText) is accepted and checked.
  static VectorTable load(const std::filesystem::path& path);
  static VectorTable parse(std::istream& in);
  void write(std::ostream& out) const;

  // Throws ParseError on duplicate token or wrong dimension.
  void add(std::string token, std::span<const double> vector);

  // Null for unknown tokens.
  const double* find(std::string_view token) const;
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

// Row i is the table vector of token i (zeros for PAD and unknown tokens),
// then pooled to cfg.out_positions. Tokens must already be padded to
// cfg.max_tokens.
EmbeddedSequence embed_static(const TokenSequence& tokens, const VectorTable& table,
                              const EmbedConfig& cfg);

// Window sizes for reducing length to out_positions: with
// L = q * out_positions + r, the first r windows hold q + 1 positions and the
// rest hold q.
std::vector<std::size_t> pooling_windows(std::size_t length, std::size_t out_positions);

// Mean over each contiguous window from pooling_windows().
EmbeddedSequence pool_to_length(const EmbeddedSequence& seq, std::size_t out_positions);

}  // namespace protestlens
