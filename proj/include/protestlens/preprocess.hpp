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
#include <map>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace protestlens {

// Coarse part-of-speech tag set.
enum class Pos { Noun, Propn, Verb, Adj, Adv, Det, Pron, Adp, Num, Punct, Other };

std::string_view pos_name(Pos pos);
Pos parse_pos(std::string_view name);
bool is_lexical(Pos pos);  // NOUN, VERB, ADJ, ADV

// Ordered tokens with an optional parallel list of tags.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<Pos> pos;

  bool has_pos() const { return !tokens.empty() && pos.size() == tokens.size(); }
  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool operator==(const TokenSequence&) const = default;
};

// Splits text into word tokens (maximal runs of letters, digits and
// apostrophes) and single-character punctuation tokens, then tags them.
// Bytes that are not valid UTF-8 are treated as single punctuation
// characters.
TokenSequence tokenize(std::string_view text);

// Heuristic tagger: closed-class lexicon (determiners, pronouns,
// adpositions, auxiliaries, common adverbs), capitalised non-initial words
// as proper nouns, suffix rules, default NOUN. Approximate by construction.
std::vector<Pos> tag(const std::vector<std::string>& tokens);

// True for tokens without any letter or digit.
bool is_special(std::string_view token);

// ASCII lowercase; other bytes pass through.
std::string to_lower(std::string_view s);

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::unordered_set<std::string> words) : words_(std::move(words)) {}

  // The bundled 179-entry English list.
  static const StopwordList& english();
  // One entry per line; blank lines and '#' comments ignored.
  static StopwordList load(const std::filesystem::path& path);
  static StopwordList parse(std::string_view text);

  // Case-insensitive membership.
  bool contains(std::string_view token) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

// Dictionary lookup in an exception table, then suffix rules per tag. The
// result is a fixed point: lemmatize(lemmatize(w)) == lemmatize(w).
class Lemmatizer {
 public:
  Lemmatizer() = default;

  // The bundled exception table.
  static const Lemmatizer& english();
  // Lines "inflected<TAB>pos<TAB>lemma"; '#' comments ignored.
  static Lemmatizer load(const std::filesystem::path& path);
  static Lemmatizer parse(std::string_view text);

  std::string lemmatize(std::string_view token, Pos pos) const;
  std::size_t exception_count() const { return exceptions_.size(); }

 private:
  std::string apply_once(const std::string& token, Pos pos) const;

  std::map<std::pair<std::string, Pos>, std::string, std::less<>> exceptions_;
  std::map<std::string, std::string, std::less<>> any_pos_;
};

// Lemmatizes with the bundled table.
std::string lemmatize(std::string_view token, Pos pos);

enum class ProfileName { NotClean, LightClean, Clean };

std::string_view profile_name(ProfileName name);
ProfileName parse_profile(std::string_view name);

struct CleanProfile {
  ProfileName name = ProfileName::NotClean;
  bool remove_stopwords = false;
  bool remove_special = false;
  bool lowercase = false;
  bool lemmatize = false;
  bool remove_proper_nouns = false;

  static CleanProfile not_clean();
  static CleanProfile light_clean();  // stopwords, special characters, lowercase
  static CleanProfile clean();        // light_clean + lemmas + proper nouns
  static CleanProfile from_name(ProfileName name);
};

// Applies the enabled steps in the fixed order
//   special -> lowercase -> stopwords -> proper nouns -> lemmas.
// Proper nouns are identified by the tags carried in seq (assigned before
// lowercasing). A lemma that is itself a stopword leaves the token as is,
// which keeps the operation idempotent. Throws DomainError when proper-noun
// removal is requested on an untagged sequence.
TokenSequence apply_profile(const TokenSequence& seq, const CleanProfile& profile,
                            const StopwordList& stopwords = StopwordList::english(),
                            const Lemmatizer& lemmatizer = Lemmatizer::english());

// Truncates text at the first match of any marker pattern (ECMAScript regex).
class RelatedTitleStripper {
 public:
  // Throws ConfigError for an invalid pattern.
  explicit RelatedTitleStripper(const std::vector<std::string>& markers);

  std::string strip(std::string_view raw) const;

 private:
  std::vector<std::regex> markers_;
};

std::string strip_related_titles(std::string_view raw, const std::vector<std::string>& markers);

// Best-effort markers for related-article blocks appended by news scrapers.
std::vector<std::string> default_related_markers();

}  // namespace protestlens
