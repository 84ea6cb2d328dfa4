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
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "protestlens/preprocess.hpp"

namespace protestlens {

inline constexpr int kProtest = 1;
inline constexpr int kNonProtest = 0;

struct LabeledExample {
  std::string id;
  std::string text;
  std::optional<int> label;  // absent for unlabelled test splits
  bool degenerate = false;   // set when text is empty
};

using Dataset = std::vector<LabeledExample>;

// Field names and label vocabulary of a JSON-lines dataset. Labels may be
// numbers 0/1, booleans, or strings listed in label_map.
struct DatasetSchema {
  std::string id_field = "id";
  std::string text_field = "text";
  std::string label_field = "label";
  std::map<std::string, int, std::less<>> label_map = {
      {"0", kNonProtest}, {"1", kProtest}, {"protest", kProtest}, {"non-protest", kNonProtest}};

  // Parses "name=0|1" pairs separated by commas, e.g. "yes=1,no=0".
  static std::map<std::string, int, std::less<>> parse_label_map(std::string_view spec);
};

// One JSON object per line; blank lines are skipped. Errors name the line.
Dataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema = {});
Dataset parse_dataset(std::istream& in, const DatasetSchema& schema = {});

// (#protest) / N. Throws DomainError on an empty dataset or missing label.
double protest_ratio(const Dataset& dataset);

struct CorpusStats {
  std::size_t n_docs = 0;
  double avg_len = 0;
  double std_len = 0;  // sample standard deviation (N - 1); 0 when N = 1
  double short_ratio = 0;
  double mean_sentence_len = 0;
  double lexical_density = 0;
  double avg_stopwords = 0;
  double avg_special_chars = 0;
  std::optional<double> protest_ratio;  // absent when any label is missing
};

// Per-document measurements over tokenize(text). short_ratio counts
// documents with fewer than short_threshold tokens. Lexical density is the
// mean of per-document densities over non-empty documents.
CorpusStats corpus_stats(const Dataset& dataset, std::size_t short_threshold,
                         const StopwordList& stopwords = StopwordList::english(),
                         std::size_t workers = 1);

// Fraction of tokens tagged NOUN, VERB, ADJ or ADV.
double lexical_density(const TokenSequence& tagged);

struct TokenCounts {
  double avg_stopwords = 0;
  double avg_special = 0;
};

TokenCounts sentence_token_stats(const Dataset& dataset, const StopwordList& stopwords,
                                 const std::function<bool(std::string_view)>& special = is_special);

// Splits after '.', '!' or '?' when followed by whitespace. Pieces are
// trimmed and empty pieces dropped.
std::vector<std::string> split_sentences(std::string_view text);

nlohmann::json to_json(const CorpusStats& stats);

// Aligned plain-text table, one row per named dataset, ratios to 2 d.p.
std::string format_stats_table(const std::vector<std::pair<std::string, CorpusStats>>& rows);

}  // namespace protestlens
