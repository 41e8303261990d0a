// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <tuple>

#include "editaudit/lexicon/lexicon.hpp"
#include "editaudit/providers/provider.hpp"

namespace editaudit::providers {

class UnparseableReplyError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/// Leading "yes"/"no" as a whole word, case-insensitive, after stripping
/// leading whitespace, quotes and punctuation. Anything else throws
/// UnparseableReplyError.
bool parse_yes_no(std::string_view reply);

enum class JudgeKind { Llm, Lexical };
std::string_view to_string(JudgeKind k);
JudgeKind parse_judge_kind(std::string_view text);

struct JudgeVerdict {
  bool match = false;
  std::string raw_response;
  JudgeKind judge_kind = JudgeKind::Lexical;
};

/// Similarity oracle for triplet matching and feedback comparison.
/// Verdicts are memoized per question on the normalized, order-free pair;
/// identical normalized inputs match without asking.
class Judge {
 public:
  virtual ~Judge() = default;

  JudgeVerdict object_similarity(std::string_view a, std::string_view b);
  JudgeVerdict feedback_overlap(std::string_view a, std::string_view b);
  /// Whether two main-difference statements describe the same change.
  JudgeVerdict same_change(std::string_view a, std::string_view b);

  virtual JudgeKind kind() const = 0;
  std::size_t cache_size() const;

 protected:
  enum class Question { Object, Feedback, Change };
  virtual JudgeVerdict ask(Question q, const std::string& a, const std::string& b) = 0;

 private:
  JudgeVerdict cached(Question q, std::string_view a, std::string_view b);

  mutable std::mutex mutex_;
  std::map<std::tuple<int, std::string, std::string>, JudgeVerdict> cache_;
};

/// Offline judge: head nouns for objects, shared feedback categories for
/// feedback, shared instruction-style nouns for main differences.
class LexicalJudge : public Judge {
 public:
  explicit LexicalJudge(const lexicon::NounLexicon& lex) : lex_(lex) {}
  JudgeKind kind() const override { return JudgeKind::Lexical; }

 protected:
  JudgeVerdict ask(Question q, const std::string& a, const std::string& b) override;

 private:
  const lexicon::NounLexicon& lex_;
};

/// Asks a text model with the judge_* prompt templates.
class LlmJudge : public Judge {
 public:
  explicit LlmJudge(Provider& provider) : provider_(provider) {}
  JudgeKind kind() const override { return JudgeKind::Llm; }

 protected:
  JudgeVerdict ask(Question q, const std::string& a, const std::string& b) override;

 private:
  Provider& provider_;
};

}  // namespace editaudit::providers
