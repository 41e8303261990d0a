// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "editaudit/core/error.hpp"

namespace editaudit::lexicon {

class LexiconError : public Error {
 public:
  using Error::Error;
};

/// Noun lexicon read from a WordNet database directory.
///
/// Required files: index.noun and data.noun. Optional: noun.exc (irregular
/// plurals) and index.verb / index.adj / index.adv. When the other index
/// files are present a word only counts as a noun if its tagged noun senses
/// are at least as frequent as its tagged senses in every other part of
/// speech; this keeps "let", "be" and "wild" out of instruction nouns.
class NounLexicon {
 public:
  static NounLexicon load(const std::filesystem::path& dir);

  /// e.g. "WordNet 3.0 index:1a2b3c4d5e6f"
  const std::string& version() const { return version_; }
  std::size_t lemma_count() const { return index_.size(); }
  std::size_t synset_count() const { return synsets_.size(); }

  /// Lowercases, then irregular-plural table, then suffix stripping
  /// (-s, -ses, -xes, -zes, -ches, -shes, -men, -ies) validated against
  /// the noun index. Unknown words come back lowercased.
  std::string lemmatize(std::string_view word) const;

  bool in_index(std::string_view lemma) const;
  /// In the index and not dominated by another part of speech.
  bool is_noun(std::string_view lemma) const;
  bool is_stopword(std::string_view lemma) const;

  /// Synset offsets of a lemma; empty when unknown.
  std::span<const std::string> synsets(std::string_view lemma) const;
  /// All lemmas of one synset.
  std::span<const std::string> members(std::string_view synset) const;
  bool share_synset(std::string_view a, std::string_view b) const;

 private:
  std::string version_;
  std::unordered_map<std::string, std::vector<std::string>> index_;
  std::unordered_map<std::string, std::vector<std::string>> synsets_;
  std::unordered_map<std::string, int> noun_tagged_;
  std::unordered_map<std::string, int> other_tagged_;
  std::unordered_map<std::string, std::string> exceptions_;
  bool have_other_pos_ = false;
};

/// Deduplicated lemmas in order of first occurrence that are lexicon nouns
/// and not stoplisted.
std::vector<std::string> extract_nouns(std::string_view text, const NounLexicon& lex);

/// Number of instruction nouns that equal, or share a synset with, at least
/// one caption noun. Each instruction noun counts at most once.
std::size_t noun_overlap(std::span<const std::string> instruction_nouns,
                         std::span<const std::string> caption_nouns, const NounLexicon& lex);

/// Head-final head noun: last non-stoplisted noun, else last token known to
/// the noun index, else last token. Empty for a phrase without words.
std::string head_noun(std::string_view phrase, const NounLexicon& lex);

/// Head nouns equal or share a synset. Attribute words are ignored.
bool lexical_similar(std::string_view a, std::string_view b, const NounLexicon& lex);

}  // namespace editaudit::lexicon
