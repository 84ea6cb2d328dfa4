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
#include "protestlens/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>

#include "protestlens/error.hpp"
#include "protestlens/parallel.hpp"

namespace protestlens {

using nlohmann::json;

namespace {

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

int parse_label(const json& value, const DatasetSchema& schema, std::size_t line) {
  if (value.is_boolean()) return value.get<bool>() ? kProtest : kNonProtest;
  if (value.is_number_integer() || value.is_number_unsigned()) {
    const auto v = value.get<long long>();
    if (v == 0 || v == 1) return static_cast<int>(v);
  } else if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    if (auto it = schema.label_map.find(s); it != schema.label_map.end()) return it->second;
  }
  throw ParseError(line_error(line, "unknown label value " + value.dump()));
}

}  // namespace

std::map<std::string, int, std::less<>> DatasetSchema::parse_label_map(std::string_view spec) {
  std::map<std::string, int, std::less<>> out;
  std::size_t start = 0;
  while (start < spec.size()) {
    std::size_t end = spec.find(',', start);
    if (end == std::string_view::npos) end = spec.size();
    const std::string_view item = spec.substr(start, end - start);
    const std::size_t eq = item.rfind('=');
    if (eq == std::string_view::npos || eq == 0 ||
        (item.substr(eq + 1) != "0" && item.substr(eq + 1) != "1"))
      throw ConfigError("label map entry '" + std::string(item) + "' is not name=0|1");
    out.emplace(std::string(item.substr(0, eq)), item[eq + 1] - '0');
    start = end + 1;
  }
  return out;
}

Dataset parse_dataset(std::istream& in, const DatasetSchema& schema) {
  Dataset out;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_error(line_no, std::string("malformed JSON: ") + e.what()));
    }
    if (!record.is_object()) throw ParseError(line_error(line_no, "record is not an object"));

    LabeledExample ex;
    auto id = record.find(schema.id_field);
    if (id == record.end()) throw ParseError(line_error(line_no, "missing field '" + schema.id_field + "'"));
    ex.id = id->is_string() ? id->get<std::string>() : id->dump();
    if (ex.id.empty()) throw ParseError(line_error(line_no, "empty id"));
    if (!seen.insert(ex.id).second) throw ParseError(line_error(line_no, "duplicate id '" + ex.id + "'"));

    auto text = record.find(schema.text_field);
    if (text == record.end() || !text->is_string())
      throw ParseError(line_error(line_no, "missing field '" + schema.text_field + "'"));
    ex.text = text->get<std::string>();
    ex.degenerate = ex.text.empty();

    auto label = record.find(schema.label_field);
    if (label != record.end() && !label->is_null()) ex.label = parse_label(*label, schema, line_no);
    out.push_back(std::move(ex));
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open dataset " + path.string());
  return parse_dataset(in, schema);
}

double protest_ratio(const Dataset& dataset) {
  if (dataset.empty()) throw DomainError("protest_ratio: empty dataset");
  std::size_t protest = 0;
  for (const auto& ex : dataset) {
    if (!ex.label) throw DomainError("protest_ratio: example '" + ex.id + "' has no label");
    protest += *ex.label == kProtest ? 1 : 0;
  }
  return static_cast<double>(protest) / static_cast<double>(dataset.size());
}

double lexical_density(const TokenSequence& tagged) {
  if (tagged.empty()) throw DomainError("lexical_density: empty sequence");
  if (!tagged.has_pos()) throw DomainError("lexical_density: sequence is not tagged");
  std::size_t lexical = 0;
  for (Pos p : tagged.pos) lexical += is_lexical(p) ? 1 : 0;
  return static_cast<double>(lexical) / static_cast<double>(tagged.size());
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') && is_ws(text[i + 1])) {
      out.emplace_back(text.substr(start, i + 1 - start));
      start = i + 1;
    }
  }
  if (start < text.size()) out.emplace_back(text.substr(start));
  for (auto& s : out) {
    const auto first = std::find_if_not(s.begin(), s.end(), is_ws);
    const auto last = std::find_if_not(s.rbegin(), s.rend(), is_ws).base();
    s = first < last ? std::string(first, last) : std::string();
  }
  std::erase_if(out, [](const std::string& s) { return s.empty(); });
  return out;
}

TokenCounts sentence_token_stats(const Dataset& dataset, const StopwordList& stopwords,
                                 const std::function<bool(std::string_view)>& special) {
  if (dataset.empty()) throw DomainError("sentence_token_stats: empty dataset");
  double stop = 0, spec = 0;
  for (const auto& ex : dataset) {
    const TokenSequence seq = tokenize(ex.text);
    for (const auto& t : seq.tokens) {
      stop += stopwords.contains(t) ? 1 : 0;
      spec += special(t) ? 1 : 0;
    }
  }
  const auto n = static_cast<double>(dataset.size());
  return {stop / n, spec / n};
}

CorpusStats corpus_stats(const Dataset& dataset, std::size_t short_threshold,
                         const StopwordList& stopwords, std::size_t workers) {
  if (dataset.empty()) throw DomainError("corpus_stats: empty dataset");
  if (short_threshold == 0) throw DomainError("corpus_stats: short threshold must be positive");

  struct DocStats {
    std::size_t tokens = 0;
    std::size_t sentences = 0;
    std::size_t sentence_tokens = 0;
    std::size_t stopwords = 0;
    std::size_t special = 0;
    std::optional<double> density;
  };
  std::vector<DocStats> docs(dataset.size());
  parallel_for(dataset.size(), workers, [&](std::size_t i) {
    DocStats& d = docs[i];
    const TokenSequence seq = tokenize(dataset[i].text);
    d.tokens = seq.size();
    for (const auto& t : seq.tokens) {
      d.stopwords += stopwords.contains(t) ? 1 : 0;
      d.special += is_special(t) ? 1 : 0;
    }
    if (!seq.empty()) d.density = lexical_density(seq);
    for (const auto& s : split_sentences(dataset[i].text)) {
      ++d.sentences;
      d.sentence_tokens += tokenize(s).size();
    }
  });

  CorpusStats st;
  st.n_docs = dataset.size();
  const auto n = static_cast<double>(st.n_docs);
  double sum = 0, stop = 0, spec = 0, density_sum = 0;
  std::size_t short_docs = 0, sentences = 0, sentence_tokens = 0, dense_docs = 0;
  for (const DocStats& d : docs) {
    sum += static_cast<double>(d.tokens);
    short_docs += d.tokens < short_threshold ? 1 : 0;
    sentences += d.sentences;
    sentence_tokens += d.sentence_tokens;
    stop += static_cast<double>(d.stopwords);
    spec += static_cast<double>(d.special);
    if (d.density) {
      density_sum += *d.density;
      ++dense_docs;
    }
  }
  st.avg_len = sum / n;
  if (st.n_docs > 1) {
    double sq = 0;
    for (const DocStats& d : docs) sq += std::pow(static_cast<double>(d.tokens) - st.avg_len, 2);
    st.std_len = std::sqrt(sq / (n - 1));
  }
  st.short_ratio = static_cast<double>(short_docs) / n;
  st.mean_sentence_len =
      sentences ? static_cast<double>(sentence_tokens) / static_cast<double>(sentences) : 0.0;
  st.lexical_density = dense_docs ? density_sum / static_cast<double>(dense_docs) : 0.0;
  st.avg_stopwords = stop / n;
  st.avg_special_chars = spec / n;
  const bool labelled =
      std::all_of(dataset.begin(), dataset.end(), [](const auto& ex) { return ex.label.has_value(); });
  if (labelled) st.protest_ratio = protest_ratio(dataset);
  return st;
}

json to_json(const CorpusStats& s) {
  json j = {{"n_docs", s.n_docs},
            {"avg_len", s.avg_len},
            {"std_len", s.std_len},
            {"short_ratio", s.short_ratio},
            {"mean_sentence_len", s.mean_sentence_len},
            {"lexical_density", s.lexical_density},
            {"avg_stopwords", s.avg_stopwords},
            {"avg_special_chars", s.avg_special_chars}};
  j["protest_ratio"] = s.protest_ratio ? json(*s.protest_ratio) : json(nullptr);
  return j;
}

std::string format_stats_table(const std::vector<std::pair<std::string, CorpusStats>>& rows) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %7s %16s %7s %8s %8s %8s %8s %7s\n", "Dataset", "Docs",
                "Avg. Len (std)", "Short", "Sent.Len", "LexDens", "Stopw.", "Special", "Ratio");
  out << buf;
  for (const auto& [name, s] : rows) {
    char len[32];
    std::snprintf(len, sizeof len, "%.0f (%.0f)", s.avg_len, s.std_len);
    char ratio[16] = "-";
    if (s.protest_ratio) std::snprintf(ratio, sizeof ratio, "%.2f", *s.protest_ratio);
    std::snprintf(buf, sizeof buf, "%-16s %7zu %16s %7.2f %8.1f %8.4f %8.2f %8.2f %7s\n",
                  name.c_str(), s.n_docs, len, s.short_ratio, s.mean_sentence_len,
                  s.lexical_density, s.avg_stopwords, s.avg_special_chars, ratio);
    out << buf;
  }
  return out.str();
}

}  // namespace protestlens
