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
#include "protestlens/features.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "protestlens/error.hpp"

namespace protestlens {

using nlohmann::json;

Tensor2 FeatureMatrix::example(std::size_t i) const {
  return Eigen::Map<const Tensor2>(rows.row(static_cast<Eigen::Index>(i)).data(),
                                   static_cast<Eigen::Index>(positions),
                                   static_cast<Eigen::Index>(dim));
}

void FeatureMatrix::append(const std::string& id, int label, const EmbeddedSequence& seq) {
  if (size() == 0 && positions == 0) {
    positions = seq.positions();
    dim = seq.dim();
  }
  if (seq.positions() != positions || seq.dim() != dim)
    throw ShapeError("feature matrix holds " + std::to_string(positions) + "x" +
                     std::to_string(dim) + " examples, got " + std::to_string(seq.positions()) +
                     "x" + std::to_string(seq.dim()));
  const auto n = rows.rows();
  rows.conservativeResize(n + 1, static_cast<Eigen::Index>(width()));
  rows.row(n) = Eigen::Map<const nn::RowVector>(seq.vectors.data(), seq.vectors.size());
  labels.push_back(label);
  ids.push_back(id);
}

std::size_t FeatureMatrix::count(int label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

void FeatureMatrix::validate() const {
  if (labels.size() != size() || ids.size() != size())
    throw ShapeError("feature matrix: labels/ids do not match row count");
  if (size() > 0 && static_cast<std::size_t>(rows.cols()) != width())
    throw ShapeError("feature matrix: row width " + std::to_string(rows.cols()) +
                     " != positions x dim " + std::to_string(width()));
  for (int l : labels)
    if (l != 0 && l != 1 && l != kUnlabeled) throw ShapeError("feature matrix: invalid label");
  if (!rows.allFinite()) throw DomainError("feature matrix contains non-finite values");
}

void write_f64_le(std::ostream& out, const double* data, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, data + i, sizeof bits);
      char bytes[8];
      for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
      out.write(bytes, 8);
    }
  }
}

void read_f64_le(std::istream& in, double* data, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      unsigned char bytes[8];
      in.read(reinterpret_cast<char*>(bytes), 8);
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
      std::memcpy(data + i, &bits, sizeof bits);
    }
  }
  if (!in) throw ParseError("truncated binary payload");
}

void write_features(const std::filesystem::path& path, const FeatureMatrix& features) {
  features.validate();
  json header = {{"format", "protestlens-features"},
                 {"version", 1},
                 {"rows", features.size()},
                 {"positions", features.positions},
                 {"dim", features.dim},
                 {"ids", features.ids},
                 {"labels", features.labels}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << header.dump() << '\n';
  write_f64_le(out, features.rows.data(), static_cast<std::size_t>(features.rows.size()));
  if (!out) throw Error("failed writing " + path.string());
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open feature file " + path.string());
  std::string line;
  std::getline(in, line);
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": bad feature header: " + e.what());
  }
  if (header.value("format", "") != "protestlens-features" || header.value("version", 0) != 1)
    throw ParseError(path.string() + ": not a protestlens feature file");
  FeatureMatrix f;
  try {
    const auto n = header.at("rows").get<std::size_t>();
    f.positions = header.at("positions").get<std::size_t>();
    f.dim = header.at("dim").get<std::size_t>();
    f.ids = header.at("ids").get<std::vector<std::string>>();
    f.labels = header.at("labels").get<std::vector<int>>();
    f.rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(f.width()));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": bad feature header: " + e.what());
  }
  read_f64_le(in, f.rows.data(), static_cast<std::size_t>(f.rows.size()));
  f.validate();
  return f;
}

}  // namespace protestlens
