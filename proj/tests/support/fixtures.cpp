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
#include "support/fixtures.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "json.hpp"

namespace protestlens::testing {

using nn::RowVector;

namespace {

double gaussian(CounterRng& rng) {
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

constexpr std::array<const char*, 12> kProtestWords = {
    "protest", "rally",  "strike",  "march",   "slogans", "agitation",
    "crowd",   "police", "dharna",  "blockade", "picket",  "demonstrators"};
constexpr std::array<const char*, 12> kOtherWords = {
    "market", "cricket", "budget", "film",   "monsoon", "festival",
    "stocks", "recipe",  "museum", "temple", "harvest", "tourism"};
constexpr std::array<const char*, 10> kFiller = {
    "city", "people", "government", "day", "officials", "week", "report", "area", "state", "year"};

}  // namespace

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  const auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    auto candidate = base / ("protestlens-test-" + std::to_string(::getpid()) + "-" +
                             std::to_string(counter++));
    if (std::filesystem::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Tensor2 random_matrix(std::size_t rows, std::size_t cols, CounterRng& rng, double lo, double hi) {
  Tensor2 m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

FeatureMatrix separable_features(std::size_t n, std::size_t n_protest, std::size_t positions,
                                 std::size_t dim, std::uint64_t seed, double margin) {
  CounterRng rng(seed, 1);
  const std::size_t width = positions * dim;
  RowVector direction(static_cast<Eigen::Index>(width));
  for (Eigen::Index j = 0; j < direction.size(); ++j) direction[j] = gaussian(rng);
  direction.normalize();

  FeatureMatrix f;
  f.positions = positions;
  f.dim = dim;
  f.rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i < n_protest ? 1 : 0;
    RowVector row(static_cast<Eigen::Index>(width));
    for (Eigen::Index j = 0; j < row.size(); ++j) row[j] = 0.3 * gaussian(rng);
    row += (label == 1 ? margin : -margin) * direction;
    f.rows.row(static_cast<Eigen::Index>(i)) = row;
    f.labels.push_back(label);
    f.ids.push_back("ex" + std::to_string(i));
  }
  return f;
}

SyntheticCorpus synthetic_corpus(std::size_t n, std::size_t n_protest, std::size_t dim,
                                 std::uint64_t seed, std::size_t min_len, std::size_t max_len) {
  CounterRng rng(seed, 2);
  SyntheticCorpus c;
  c.vectors = VectorTable(dim);
  auto add_cluster = [&](const auto& words, double centre) {
    for (const char* w : words) {
      std::vector<double> v(dim);
      for (auto& x : v) x = centre + 0.25 * gaussian(rng);
      c.vectors.add(w, v);
    }
  };
  add_cluster(kProtestWords, 1.0);
  add_cluster(kOtherWords, -1.0);
  add_cluster(kFiller, 0.0);

  // Protest documents are spread through the corpus rather than grouped.
  std::vector<int> labels(n, 0);
  for (std::size_t k = 0; k < n_protest; ++k) labels[k] = 1;
  for (std::size_t i = n; i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = min_len + rng.below(max_len - min_len + 1);
    std::string text = "The";
    for (std::size_t t = 0; t < len; ++t) {
      text += ' ';
      if (rng.uniform() < 0.5)
        text += kFiller[rng.below(kFiller.size())];
      else if (labels[i] == 1)
        text += kProtestWords[rng.below(kProtestWords.size())];
      else
        text += kOtherWords[rng.below(kOtherWords.size())];
    }
    text += '.';
    char id[32];
    std::snprintf(id, sizeof id, "doc%04zu", i);
    c.data.push_back({id, text, labels[i], false});
  }
  return c;
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::string body;
  for (const auto& ex : data) {
    nlohmann::json j = {{"id", ex.id}, {"text", ex.text}};
    j["label"] = ex.label ? nlohmann::json(*ex.label) : nlohmann::json(nullptr);
    body += j.dump() + "\n";
  }
  write_text(path, body);
}

TokenSequence random_token_sequence(CounterRng& rng, std::size_t max_len) {
  static const std::vector<std::string> pool = {
      "The", "the", "police", "Police", "arrested", "protesters", "libraries", "running",
      "ran", "went", "children", "Delhi", "Mumbai", "and", "of", "is", "was", "Being",
      "strikes", "rallied", "5", "2019", "!", ",", ".", "?", "--", "\xe2\x80\x9c", "caf\xc3\xa9",
      "don't", "it's", "STRIKE", "cities", "buses", "marching", "hopped", "quickly",
      "mice", "better", "has", "had", "an", "A", "workers'", "Kolkata", "stopped", "agreed"};
  TokenSequence seq;
  const std::size_t len = rng.below(max_len + 1);
  for (std::size_t i = 0; i < len; ++i) seq.tokens.push_back(pool[rng.below(pool.size())]);
  if (rng.below(4) != 0) seq.pos = tag(seq.tokens);
  return seq;
}

}  // namespace protestlens::testing
