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

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "protestlens/corpus.hpp"

namespace protestlens {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

// Positive class is 1 (protest). Throws on length mismatch, empty input or a
// label outside {0, 1}.
ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> pred);

struct ClassMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;
};

struct MetricsReport {
  ConfusionMatrix cm;
  double accuracy = 0;
  std::array<ClassMetrics, 2> per_class;  // index = class label
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
  // Row = actual class, column = predicted class, each row divided by its
  // total (a zero row stays zero).
  std::array<std::array<double, 2>, 2> normalized{};
};

// Precision, recall and F1 per class with 0 for any vanished denominator;
// macro values are the unweighted means over both classes.
MetricsReport metrics_report(const ConfusionMatrix& cm);

nlohmann::json to_json(const MetricsReport& report);

// Rows of P / R / F1 per named test set plus their average.
std::string format_metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);

// Text grid: actual class by predicted class, counts and row-normalised rates.
std::string render_confusion(const MetricsReport& report);

struct ErrorEntry {
  std::string id;
  std::string text;
  std::vector<std::string> keywords;  // matched keywords, if any
};

struct ErrorReport {
  std::vector<ErrorEntry> keyword_fn;       // false negatives containing a keyword
  std::vector<ErrorEntry> false_negatives;  // remaining false negatives
  std::vector<ErrorEntry> false_positives;
  ConfusionMatrix cm;
};

// Splits misclassified examples into keyword false negatives, other false
// negatives and false positives. Keywords match case-insensitively
// anywhere in the text. Entries are ordered by id.
ErrorReport error_analysis(const Dataset& examples, std::span<const int> preds,
                           const std::vector<std::string>& keywords);

std::vector<std::string> default_error_keywords();

nlohmann::json to_json(const ErrorReport& report);

}  // namespace protestlens
