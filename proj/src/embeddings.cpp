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
#include "protestlens/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "protestlens/error.hpp"

namespace protestlens {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool parse_double(std::string_view s, double& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_size(std::string_view s, std::size_t& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

std::string_view task_name(Task task) { return task == Task::Task1 ? "task1" : "task2"; }

Task parse_task(std::string_view name) {
  if (name == "task1") return Task::Task1;
  if (name == "task2") return Task::Task2;
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

std::string_view provider_name(Provider provider) {
  return provider == Provider::Static ? "static" : "remote";
}

Provider parse_provider(std::string_view name) {
  if (name == "static") return Provider::Static;
  if (name == "remote") return Provider::Remote;
  throw ConfigError("unknown embedding provider '" + std::string(name) + "'");
}

EmbedConfig EmbedConfig::for_task(Task task, std::size_t dim, Provider provider) {
  EmbedConfig cfg;
  cfg.max_tokens = task == Task::Task1 ? 800 : 100;
  cfg.out_positions = task == Task::Task1 ? 256 : 32;
  cfg.dim = dim;
  cfg.provider = provider;
  return cfg;
}

void EmbedConfig::validate() const {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  if (out_positions == 0 || out_positions > max_tokens)
    throw ConfigError("output positions " + std::to_string(out_positions) +
                      " must lie in [1, max tokens " + std::to_string(max_tokens) + "]");
}

TokenSequence pad_or_truncate(const TokenSequence& tokens, std::size_t max_tokens) {
  TokenSequence out = tokens;
  const bool tagged = tokens.has_pos();
  out.tokens.resize(max_tokens, std::string(kPadToken));
  if (tagged) out.pos.resize(max_tokens, Pos::Punct);
  else out.pos.clear();
  return out;
}

// ---------------------------------------------------------------- VectorTable

void VectorTable::add(std::string token, std::span<const double> vector) {
  if (dim_ == 0) dim_ = vector.size();
  if (vector.size() != dim_ || dim_ == 0)
    throw ParseError("vector for '" + token + "' has dimension " + std::to_string(vector.size()) +
                     ", table has " + std::to_string(dim_));
  if (index_.contains(token)) throw ParseError("duplicate token '" + token + "'");
  index_.emplace(std::move(token), index_.size());
  data_.insert(data_.end(), vector.begin(), vector.end());
}

const double* VectorTable::find(std::string_view token) const {
  if (token == kPadToken) return nullptr;
  auto it = index_.find(std::string(token));
  return it == index_.end() ? nullptr : data_.data() + it->second * dim_;
}

VectorTable VectorTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open vector file " + path.string());
  return parse(in);
}

VectorTable VectorTable::parse(std::istream& in) {
  VectorTable table;
  std::string line;
  std::size_t line_no = 0;
  std::size_t declared_rows = 0;
  bool has_header = false;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    std::size_t a = 0, b = 0;
    if (line_no == 1 && fields.size() == 2 && parse_size(fields[0], a) && parse_size(fields[1], b)) {
      has_header = true;
      declared_rows = a;
      table.dim_ = b;
      continue;
    }
    if (fields.size() < 2) throw ParseError("line " + std::to_string(line_no) + ": no vector values");
    const std::size_t d = fields.size() - 1;
    if (table.dim_ != 0 && d != table.dim_)
      throw ParseError("line " + std::to_string(line_no) + ": dim mismatch (" + std::to_string(d) +
                       " values, expected " + std::to_string(table.dim_) + ")");
    values.resize(d);
    for (std::size_t k = 0; k < d; ++k)
      if (!parse_double(fields[k + 1], values[k]) || !std::isfinite(values[k]))
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" +
                         std::string(fields[k + 1]) + "'");
    std::string token(fields[0]);
    if (table.index_.contains(token))
      throw ParseError("line " + std::to_string(line_no) + ": duplicate token '" + token + "'");
    table.add(std::move(token), values);
  }
  if (has_header && declared_rows != table.size())
    throw ParseError("header declares " + std::to_string(declared_rows) + " vectors, file has " +
                     std::to_string(table.size()));
  return table;
}

void VectorTable::write(std::ostream& out) const {
  std::vector<std::pair<std::size_t, const std::string*>> order;
  for (const auto& [tok, idx] : index_) order.emplace_back(idx, &tok);
  std::sort(order.begin(), order.end());
  char buf[32];
  for (const auto& [idx, tok] : order) {
    out << *tok;
    for (std::size_t k = 0; k < dim_; ++k) {
      std::snprintf(buf, sizeof buf, " %.17g", data_[idx * dim_ + k]);
      out << buf;
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------- embedding

EmbeddedSequence embed_static(const TokenSequence& tokens, const VectorTable& table,
                              const EmbedConfig& cfg) {
  cfg.validate();
  if (table.dim() != cfg.dim)
    throw ShapeError("vector table has dimension " + std::to_string(table.dim()) +
                     ", configuration expects " + std::to_string(cfg.dim));
  if (tokens.size() != cfg.max_tokens)
    throw ShapeError("expected " + std::to_string(cfg.max_tokens) + " padded tokens, got " +
                     std::to_string(tokens.size()));
  EmbeddedSequence seq{Tensor2::Zero(static_cast<Eigen::Index>(tokens.size()),
                                     static_cast<Eigen::Index>(cfg.dim))};
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (const double* v = table.find(tokens.tokens[i]))
      seq.vectors.row(static_cast<Eigen::Index>(i)) =
          Eigen::Map<const nn::RowVector>(v, static_cast<Eigen::Index>(cfg.dim));
  return pool_to_length(seq, cfg.out_positions);
}

std::vector<std::size_t> pooling_windows(std::size_t length, std::size_t out_positions) {
  if (out_positions == 0 || out_positions > length)
    throw ShapeError("cannot pool " + std::to_string(length) + " positions to " +
                     std::to_string(out_positions));
  const std::size_t q = length / out_positions;
  const std::size_t r = length % out_positions;
  std::vector<std::size_t> sizes(out_positions, q);
  for (std::size_t j = 0; j < r; ++j) ++sizes[j];
  return sizes;
}

EmbeddedSequence pool_to_length(const EmbeddedSequence& seq, std::size_t out_positions) {
  const auto sizes = pooling_windows(seq.positions(), out_positions);
  EmbeddedSequence out{Tensor2(static_cast<Eigen::Index>(out_positions), seq.vectors.cols())};
  Eigen::Index start = 0;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    const auto len = static_cast<Eigen::Index>(sizes[j]);
    out.vectors.row(static_cast<Eigen::Index>(j)) =
        seq.vectors.middleRows(start, len).colwise().sum() / static_cast<double>(len);
    start += len;
  }
  return out;
}

}  // namespace protestlens
