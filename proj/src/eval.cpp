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
#include "protestlens/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "protestlens/error.hpp"

namespace protestlens {

using nlohmann::json;

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

json entries_json(const std::vector<ErrorEntry>& entries) {
  json arr = json::array();
  for (const auto& e : entries) arr.push_back({{"id", e.id}, {"text", e.text}, {"keywords", e.keywords}});
  return arr;
}

json cm_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}};
}

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size())
    throw DomainError("confusion_matrix: " + std::to_string(truth.size()) + " labels but " +
                      std::to_string(pred.size()) + " predictions");
  if (truth.empty()) throw DomainError("confusion_matrix: no labels");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1))
      throw DomainError("confusion_matrix: non-binary label at position " + std::to_string(i));
    if (t == 1) (p == 1 ? cm.tp : cm.fn)++;
    else (p == 1 ? cm.fp : cm.tn)++;
  }
  return cm;
}

MetricsReport metrics_report(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.cm = cm;
  r.accuracy = ratio(cm.tp + cm.tn, cm.total());

  ClassMetrics& pos = r.per_class[1];
  pos.precision = ratio(cm.tp, cm.tp + cm.fp);
  pos.recall = ratio(cm.tp, cm.tp + cm.fn);
  pos.f1 = harmonic(pos.precision, pos.recall);
  pos.support = cm.tp + cm.fn;

  // Class 0 seen as the positive class: TN plays TP, FN plays FP.
  ClassMetrics& neg = r.per_class[0];
  neg.precision = ratio(cm.tn, cm.tn + cm.fn);
  neg.recall = ratio(cm.tn, cm.tn + cm.fp);
  neg.f1 = harmonic(neg.precision, neg.recall);
  neg.support = cm.tn + cm.fp;

  r.macro_precision = (pos.precision + neg.precision) / 2.0;
  r.macro_recall = (pos.recall + neg.recall) / 2.0;
  r.macro_f1 = (pos.f1 + neg.f1) / 2.0;

  r.normalized[0] = {ratio(cm.tn, cm.tn + cm.fp), ratio(cm.fp, cm.tn + cm.fp)};
  r.normalized[1] = {ratio(cm.fn, cm.fn + cm.tp), ratio(cm.tp, cm.fn + cm.tp)};
  return r;
}

json to_json(const MetricsReport& r) {
  json per_class = json::object();
  for (int c = 0; c < 2; ++c) {
    const ClassMetrics& m = r.per_class[static_cast<std::size_t>(c)];
    per_class[c == 1 ? "protest" : "non-protest"] = {
        {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
  }
  return {{"confusion_matrix", cm_json(r.cm)},
          {"normalized_confusion_matrix", r.normalized},
          {"accuracy", r.accuracy},
          {"per_class", per_class},
          {"macro_precision", r.macro_precision},
          {"macro_recall", r.macro_recall},
          {"macro_f1", r.macro_f1},
          {"n", r.cm.total()}};
}

std::string format_metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %9s %9s %9s %9s\n", "Test set", "Precision", "Recall", "F1",
                "Accuracy");
  out << buf;
  double p = 0, r = 0, f = 0, a = 0;
  for (const auto& [name, m] : rows) {
    std::snprintf(buf, sizeof buf, "%-16s %9.4f %9.4f %9.4f %9.4f\n", name.c_str(),
                  m.macro_precision, m.macro_recall, m.macro_f1, m.accuracy);
    out << buf;
    p += m.macro_precision;
    r += m.macro_recall;
    f += m.macro_f1;
    a += m.accuracy;
  }
  if (rows.size() > 1) {
    const auto n = static_cast<double>(rows.size());
    std::snprintf(buf, sizeof buf, "%-16s %9.4f %9.4f %9.4f %9.4f\n", "Average", p / n, r / n,
                  f / n, a / n);
    out << buf;
  }
  return out.str();
}

std::string render_confusion(const MetricsReport& r) {
  const ConfusionMatrix& cm = r.cm;
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-22s %-18s %-18s %8s\n", "actual / predicted", "Non-Protest",
                "Protest", "Total");
  out << buf;
  char cell_a[32], cell_b[32];
  std::snprintf(cell_a, sizeof cell_a, "TN %zu (%.2f)", cm.tn, r.normalized[0][0]);
  std::snprintf(cell_b, sizeof cell_b, "FP %zu (%.2f)", cm.fp, r.normalized[0][1]);
  std::snprintf(buf, sizeof buf, "%-22s %-18s %-18s %8zu\n", "Non-Protest", cell_a, cell_b,
                cm.tn + cm.fp);
  out << buf;
  std::snprintf(cell_a, sizeof cell_a, "FN %zu (%.2f)", cm.fn, r.normalized[1][0]);
  std::snprintf(cell_b, sizeof cell_b, "TP %zu (%.2f)", cm.tp, r.normalized[1][1]);
  std::snprintf(buf, sizeof buf, "%-22s %-18s %-18s %8zu\n", "Protest", cell_a, cell_b,
                cm.fn + cm.tp);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-22s %-18zu %-18zu %8zu\n", "Total", cm.tn + cm.fn,
                cm.fp + cm.tp, cm.total());
  out << buf;
  return out.str();
}

ErrorReport error_analysis(const Dataset& examples, std::span<const int> preds,
                           const std::vector<std::string>& keywords) {
  if (examples.size() != preds.size())
    throw DomainError("error_analysis: " + std::to_string(examples.size()) + " examples but " +
                      std::to_string(preds.size()) + " predictions");
  std::vector<int> truth;
  truth.reserve(examples.size());
  for (const auto& ex : examples) {
    if (!ex.label) throw DomainError("error_analysis: example '" + ex.id + "' has no label");
    truth.push_back(*ex.label);
  }
  ErrorReport report;
  if (examples.empty()) return report;
  report.cm = confusion_matrix(truth, preds);

  std::vector<std::string> lowered;
  for (const auto& k : keywords) lowered.push_back(to_lower(k));
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (truth[i] == preds[i]) continue;
    ErrorEntry e{examples[i].id, examples[i].text, {}};
    if (truth[i] == 1) {
      const std::string text = to_lower(examples[i].text);
      for (std::size_t k = 0; k < keywords.size(); ++k)
        if (!lowered[k].empty() && text.find(lowered[k]) != std::string::npos)
          e.keywords.push_back(keywords[k]);
      (e.keywords.empty() ? report.false_negatives : report.keyword_fn).push_back(std::move(e));
    } else {
      report.false_positives.push_back(std::move(e));
    }
  }
  auto by_id = [](const ErrorEntry& a, const ErrorEntry& b) { return a.id < b.id; };
  std::sort(report.keyword_fn.begin(), report.keyword_fn.end(), by_id);
  std::sort(report.false_negatives.begin(), report.false_negatives.end(), by_id);
  std::sort(report.false_positives.begin(), report.false_positives.end(), by_id);
  return report;
}

std::vector<std::string> default_error_keywords() {
  return {"protest", "protesting", "agitation", "demonstration", "rally", "strike"};
}

json to_json(const ErrorReport& r) {
  return {{"counts",
           {{"keyword_fn", r.keyword_fn.size()},
            {"false_negatives", r.false_negatives.size() + r.keyword_fn.size()},
            {"false_positives", r.false_positives.size()},
            {"true_positives", r.cm.tp},
            {"true_negatives", r.cm.tn}}},
          {"keyword_fn", entries_json(r.keyword_fn)},
          {"false_negatives", entries_json(r.false_negatives)},
          {"false_positives", entries_json(r.false_positives)}};
}

}  // namespace protestlens
