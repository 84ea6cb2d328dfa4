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
#include "protestlens/preprocess.hpp"

#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "protestlens/error.hpp"

namespace protestlens {

namespace data {
extern const std::string_view kStopwordsEn;
extern const std::string_view kLemmaExceptions;
}  // namespace data

namespace {

struct CodePoint {
  char32_t value;
  std::size_t length;
  bool valid;
};

CodePoint decode(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1, true};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {b0, 1, false};
  }
  if (i + len > s.size()) return {b0, 1, false};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return {b0, 1, false};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len, true};
}

bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f' ||
         c == 0x85 || c == 0xA0 || c == 0x1680 || (c >= 0x2000 && c <= 0x200B) ||
         c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000 ||
         c == 0xFEFF;
}

bool is_apostrophe(char32_t c) { return c == '\'' || c == 0x2019 || c == 0x02BC; }

bool is_symbol(char32_t c) {
  if (c < 0x80) return false;
  return (c >= 0xA1 && c <= 0xA9) || (c >= 0xAB && c <= 0xB1) || c == 0xB4 ||
         (c >= 0xB6 && c <= 0xB8) || c == 0xBB || c == 0xBF || c == 0xD7 || c == 0xF7 ||
         (c >= 0x2010 && c <= 0x205E) || (c >= 0x20A0 && c <= 0x20CF) ||
         (c >= 0x2190 && c <= 0x2BFF) || (c >= 0x3000 && c <= 0x303F) ||
         (c >= 0xFE30 && c <= 0xFE4F) || (c >= 0xFF01 && c <= 0xFF0F) ||
         (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) ||
         (c >= 0xFF5B && c <= 0xFF65) || (c >= 0x1F000 && c <= 0x1FAFF);
}

bool is_alnum(CodePoint cp) {
  const char32_t c = cp.value;
  if (!cp.valid) return false;
  if (c < 0x80) return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  return !is_space(c) && !is_symbol(c) && !is_apostrophe(c);
}

bool is_word_char(CodePoint cp) { return is_alnum(cp) || (cp.valid && is_apostrophe(cp.value)); }

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool starts_with_digit(std::string_view s) { return !s.empty() && s[0] >= '0' && s[0] <= '9'; }

template <std::size_t N>
bool in_list(const std::array<std::string_view, N>& list, std::string_view w) {
  for (auto x : list)
    if (x == w) return true;
  return false;
}

constexpr std::array<std::string_view, 22> kDeterminers = {
    "the",  "a",    "an",    "this",  "that", "these", "those",   "every",
    "each", "some", "any",   "no",    "all",  "both",  "another", "such",
    "either", "neither", "its", "their", "his", "whose"};

constexpr std::array<std::string_view, 30> kPronouns = {
    "i",      "me",    "you",   "he",      "him",   "she",   "her",      "it",
    "we",     "us",    "they",  "them",    "my",    "mine",  "your",     "yours",
    "our",    "ours",  "hers",  "theirs",  "who",   "whom",  "what",     "which",
    "myself", "itself", "himself", "herself", "themselves", "ourselves"};

constexpr std::array<std::string_view, 42> kAdpositions = {
    "in",      "on",     "at",      "of",      "for",     "with",    "to",
    "from",    "by",     "about",   "against", "between", "into",    "through",
    "during",  "before", "after",   "above",   "below",   "over",    "under",
    "up",      "down",   "out",     "off",     "near",    "across",  "along",
    "around",  "behind", "beyond",  "despite", "among",   "within",  "without",
    "towards", "toward", "upon",    "amid",    "onto",    "via",     "per"};

constexpr std::array<std::string_view, 17> kConjunctions = {
    "and", "or", "but", "nor", "yet", "so", "because", "if", "while",
    "although", "though", "unless", "until", "whereas", "whether", "than", "as"};

constexpr std::array<std::string_view, 27> kVerbs = {
    "is",    "are",   "was",  "were",   "be",    "been",   "being", "am",  "has",
    "have",  "had",   "do",   "does",   "did",   "will",   "would", "shall",
    "should", "can",  "could", "may",   "might", "must",   "said",  "says", "say", "got"};

constexpr std::array<std::string_view, 22> kAdverbs = {
    "not",    "very",  "also",  "too",   "now",   "then",   "here",  "there",
    "just",   "only",  "still", "already", "again", "never", "always", "often",
    "soon",   "even",  "however", "why",  "how",  "when"};

// Nouns the -ly adverb rule would otherwise catch.
constexpr std::array<std::string_view, 12> kLyNouns = {
    "rally", "july", "family", "supply", "assembly", "reply",
    "ally",  "anomaly", "monopoly", "belly", "jelly", "bully"};

Pos tag_word(const std::string& token, bool sentence_initial) {
  if (is_special(token)) return Pos::Punct;
  if (starts_with_digit(token)) return Pos::Num;
  const std::string w = to_lower(token);
  if (in_list(kDeterminers, w)) return Pos::Det;
  if (in_list(kPronouns, w)) return Pos::Pron;
  if (in_list(kAdpositions, w)) return Pos::Adp;
  if (in_list(kConjunctions, w)) return Pos::Other;
  if (in_list(kVerbs, w)) return Pos::Verb;
  if (in_list(kAdverbs, w)) return Pos::Adv;
  const bool capitalised = token[0] >= 'A' && token[0] <= 'Z';
  if (capitalised && !sentence_initial) return Pos::Propn;
  const std::size_t n = w.size();
  if (n > 4 && ends_with(w, "ly") && !in_list(kLyNouns, w)) return Pos::Adv;
  if ((n > 4 && ends_with(w, "ing")) || (n > 3 && ends_with(w, "ed"))) return Pos::Verb;
  for (std::string_view suffix : {"ous", "ful", "ive", "able", "ible", "less", "ic"})
    if (n > suffix.size() + 2 && ends_with(w, suffix)) return Pos::Adj;
  return Pos::Noun;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool plausible_stem(std::string_view stem) {
  if (stem.size() < 3) return false;
  for (char c : stem)
    if (is_vowel(c)) return true;
  return false;
}

std::string undouble(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) &&
      std::string_view("lsz").find(stem[n - 1]) == std::string_view::npos)
    stem.pop_back();
  return stem;
}

bool plural_s(std::string_view w) {
  return w.size() > 3 && ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") &&
         !ends_with(w, "is");
}

std::string noun_lemma(const std::string& w) {
  const std::size_t n = w.size();
  if (n > 4 && ends_with(w, "ies")) return w.substr(0, n - 3) + "y";
  for (std::string_view suffix : {"sses", "shes", "ches", "xes", "zzes"})
    if (n > 4 && ends_with(w, suffix)) return w.substr(0, n - 2);
  if (plural_s(w)) return w.substr(0, n - 1);
  return w;
}

std::string verb_lemma(const std::string& w) {
  const std::size_t n = w.size();
  if (n > 4 && (ends_with(w, "ies") || ends_with(w, "ied"))) return w.substr(0, n - 3) + "y";
  if (n > 5 && ends_with(w, "ing")) {
    const std::string stem = w.substr(0, n - 3);
    return plausible_stem(stem) ? undouble(stem) : w;
  }
  if (n > 4 && ends_with(w, "ed") && !ends_with(w, "eed")) {
    const std::string stem = w.substr(0, n - 2);
    return plausible_stem(stem) ? undouble(stem) : w;
  }
  for (std::string_view suffix : {"sses", "shes", "ches", "xes"})
    if (n > 4 && ends_with(w, suffix)) return w.substr(0, n - 2);
  if (plural_s(w)) return w.substr(0, n - 1);
  return w;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view pos_name(Pos pos) {
  switch (pos) {
    case Pos::Noun: return "NOUN";
    case Pos::Propn: return "PROPN";
    case Pos::Verb: return "VERB";
    case Pos::Adj: return "ADJ";
    case Pos::Adv: return "ADV";
    case Pos::Det: return "DET";
    case Pos::Pron: return "PRON";
    case Pos::Adp: return "ADP";
    case Pos::Num: return "NUM";
    case Pos::Punct: return "PUNCT";
    case Pos::Other: return "OTHER";
  }
  return "OTHER";
}

Pos parse_pos(std::string_view name) {
  for (Pos p : {Pos::Noun, Pos::Propn, Pos::Verb, Pos::Adj, Pos::Adv, Pos::Det, Pos::Pron,
                Pos::Adp, Pos::Num, Pos::Punct, Pos::Other})
    if (pos_name(p) == name) return p;
  throw ParseError("unknown POS tag '" + std::string(name) + "'");
}

bool is_lexical(Pos pos) {
  return pos == Pos::Noun || pos == Pos::Verb || pos == Pos::Adj || pos == Pos::Adv;
}

bool is_special(std::string_view token) {
  for (std::size_t i = 0; i < token.size();) {
    const CodePoint cp = decode(token, i);
    if (is_alnum(cp)) return false;
    i += cp.length;
  }
  return true;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::vector<Pos> tag(const std::vector<std::string>& tokens) {
  std::vector<Pos> tags;
  tags.reserve(tokens.size());
  bool initial = true;
  for (const std::string& t : tokens) {
    tags.push_back(tag_word(t, initial));
    initial = t == "." || t == "!" || t == "?";
  }
  return tags;
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence seq;
  std::size_t i = 0;
  while (i < text.size()) {
    const CodePoint cp = decode(text, i);
    if (cp.valid && is_space(cp.value)) {
      i += cp.length;
      continue;
    }
    if (is_word_char(cp)) {
      const std::size_t start = i;
      while (i < text.size()) {
        const CodePoint next = decode(text, i);
        if (!is_word_char(next)) break;
        i += next.length;
      }
      seq.tokens.emplace_back(text.substr(start, i - start));
      continue;
    }
    seq.tokens.emplace_back(text.substr(i, cp.length));
    i += cp.length;
  }
  seq.pos = tag(seq.tokens);
  return seq;
}

// ---------------------------------------------------------------- stopwords

const StopwordList& StopwordList::english() {
  static const StopwordList list = parse(data::kStopwordsEn);
  return list;
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

StopwordList StopwordList::parse(std::string_view text) {
  std::unordered_set<std::string> words;
  for (std::string_view line : split_lines(text)) {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    if (line.empty() || line[0] == '#') continue;
    words.insert(to_lower(line));
  }
  return StopwordList(std::move(words));
}

bool StopwordList::contains(std::string_view token) const {
  return words_.contains(to_lower(token));
}

// ---------------------------------------------------------------- lemmas

const Lemmatizer& Lemmatizer::english() {
  static const Lemmatizer lemmatizer = parse(data::kLemmaExceptions);
  return lemmatizer;
}

Lemmatizer Lemmatizer::load(const std::filesystem::path& path) { return parse(read_file(path)); }

Lemmatizer Lemmatizer::parse(std::string_view text) {
  Lemmatizer out;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos || line.find('\t', t2 + 1) != std::string_view::npos)
      throw ParseError("lemma table line " + std::to_string(line_no) +
                       ": expected inflected<TAB>pos<TAB>lemma");
    const std::string inflected(line.substr(0, t1));
    const std::string_view pos = line.substr(t1 + 1, t2 - t1 - 1);
    const std::string lemma(line.substr(t2 + 1));
    if (inflected.empty() || lemma.empty())
      throw ParseError("lemma table line " + std::to_string(line_no) + ": empty field");
    if (pos != "*") out.exceptions_.emplace(std::pair{inflected, parse_pos(pos)}, lemma);
    out.any_pos_.emplace(inflected, lemma);
  }
  return out;
}

std::string Lemmatizer::apply_once(const std::string& token, Pos pos) const {
  if (auto it = exceptions_.find(std::pair{token, pos}); it != exceptions_.end()) return it->second;
  if (auto it = any_pos_.find(token); it != any_pos_.end()) return it->second;
  std::string w = token;
  if (ends_with(w, "'s") && w.size() > 2) w.resize(w.size() - 2);
  else if (ends_with(w, "’s") && w.size() > 4) w.resize(w.size() - 4);
  else if (ends_with(w, "'") && w.size() > 1) w.pop_back();
  if (w != token) return w;
  switch (pos) {
    case Pos::Noun:
    case Pos::Propn: return noun_lemma(w);
    case Pos::Verb: return verb_lemma(w);
    default: return w;
  }
}

std::string Lemmatizer::lemmatize(std::string_view token, Pos pos) const {
  std::string current(token);
  for (int round = 0; round < 8; ++round) {
    std::string next = apply_once(current, pos);
    if (next == current || next.empty()) break;
    current = std::move(next);
  }
  return current;
}

std::string lemmatize(std::string_view token, Pos pos) {
  return Lemmatizer::english().lemmatize(token, pos);
}

// ---------------------------------------------------------------- profiles

std::string_view profile_name(ProfileName name) {
  switch (name) {
    case ProfileName::NotClean: return "notclean";
    case ProfileName::LightClean: return "lightclean";
    case ProfileName::Clean: return "clean";
  }
  return "notclean";
}

ProfileName parse_profile(std::string_view name) {
  const std::string n = to_lower(name);
  if (n == "notclean") return ProfileName::NotClean;
  if (n == "lightclean") return ProfileName::LightClean;
  if (n == "clean") return ProfileName::Clean;
  throw ConfigError("unknown clean profile '" + std::string(name) + "'");
}

CleanProfile CleanProfile::not_clean() { return {}; }

CleanProfile CleanProfile::light_clean() {
  CleanProfile p;
  p.name = ProfileName::LightClean;
  p.remove_stopwords = p.remove_special = p.lowercase = true;
  return p;
}

CleanProfile CleanProfile::clean() {
  CleanProfile p = light_clean();
  p.name = ProfileName::Clean;
  p.lemmatize = p.remove_proper_nouns = true;
  return p;
}

CleanProfile CleanProfile::from_name(ProfileName name) {
  switch (name) {
    case ProfileName::NotClean: return not_clean();
    case ProfileName::LightClean: return light_clean();
    case ProfileName::Clean: return clean();
  }
  return not_clean();
}

TokenSequence apply_profile(const TokenSequence& seq, const CleanProfile& profile,
                            const StopwordList& stopwords, const Lemmatizer& lemmatizer) {
  const bool tagged = seq.has_pos();
  if (profile.remove_proper_nouns && !tagged && !seq.empty())
    throw DomainError("proper-noun removal requires a POS-tagged sequence");
  TokenSequence out;
  out.tokens.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    std::string token = seq.tokens[i];
    const Pos pos = tagged ? seq.pos[i] : Pos::Noun;
    if (profile.remove_special && is_special(token)) continue;
    if (profile.lowercase) token = to_lower(token);
    if (profile.remove_stopwords && stopwords.contains(token)) continue;
    if (profile.remove_proper_nouns && pos == Pos::Propn) continue;
    if (profile.lemmatize) {
      std::string lemma = lemmatizer.lemmatize(token, pos);
      const bool keep_surface = lemma.empty() || is_special(lemma) ||
                                (profile.remove_stopwords && stopwords.contains(lemma));
      if (!keep_surface) token = std::move(lemma);
    }
    out.tokens.push_back(std::move(token));
    if (tagged) out.pos.push_back(pos);
  }
  return out;
}

// ---------------------------------------------------------------- related titles

RelatedTitleStripper::RelatedTitleStripper(const std::vector<std::string>& markers) {
  for (const std::string& m : markers) {
    try {
      markers_.emplace_back(m, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw ConfigError("invalid related-title marker '" + m + "': " + e.what());
    }
  }
}

std::string RelatedTitleStripper::strip(std::string_view raw) const {
  std::size_t cut = raw.size();
  for (const std::regex& re : markers_) {
    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_search(raw.begin(), raw.end(), m, re))
      cut = std::min(cut, static_cast<std::size_t>(m.position(0)));
  }
  return std::string(raw.substr(0, cut));
}

std::string strip_related_titles(std::string_view raw, const std::vector<std::string>& markers) {
  return RelatedTitleStripper(markers).strip(raw);
}

std::vector<std::string> default_related_markers() {
  return {R"(Related Articles?\s*:?)", R"(Also [Rr]ead\s*:)", R"(RELATED\s*:)",
          R"(Read [Mm]ore\s*:)"};
}

}  // namespace protestlens
