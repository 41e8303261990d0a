// SPDX-License-Identifier: Apache-2.0
#include "editaudit/providers/judge.hpp"

#include <cctype>

#include "editaudit/core/text.hpp"
#include "editaudit/harness/feedback.hpp"
#include "editaudit/pipeline/prompts.hpp"

namespace editaudit::providers {

bool parse_yes_no(std::string_view reply) {
  std::size_t i = 0;
  while (i < reply.size()) {
    const auto c = static_cast<unsigned char>(reply[i]);
    if (std::isalnum(c)) break;
    ++i;
  }
  auto word_end = i;
  while (word_end < reply.size() && std::isalpha(static_cast<unsigned char>(reply[word_end])))
    ++word_end;
  const auto word = text::to_lower(reply.substr(i, word_end - i));
  if (word == "yes") return true;
  if (word == "no") return false;
  throw UnparseableReplyError("reply is neither yes nor no: \"" +
                              std::string(reply.substr(0, 120)) + "\"");
}

std::string_view to_string(JudgeKind k) { return k == JudgeKind::Llm ? "llm" : "lexical"; }

JudgeKind parse_judge_kind(std::string_view text) {
  const auto t = text::to_lower(text);
  if (t == "llm") return JudgeKind::Llm;
  if (t == "lexical") return JudgeKind::Lexical;
  throw ProviderError("unknown judge '" + std::string(text) + "' (llm|lexical)");
}

JudgeVerdict Judge::object_similarity(std::string_view a, std::string_view b) {
  return cached(Question::Object, a, b);
}
JudgeVerdict Judge::feedback_overlap(std::string_view a, std::string_view b) {
  return cached(Question::Feedback, a, b);
}
JudgeVerdict Judge::same_change(std::string_view a, std::string_view b) {
  return cached(Question::Change, a, b);
}

std::size_t Judge::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

JudgeVerdict Judge::cached(Question q, std::string_view a, std::string_view b) {
  auto na = text::normalize_phrase(a);
  auto nb = text::normalize_phrase(b);
  if (na.empty() || nb.empty()) throw ProviderError("judge inputs must be non-empty");
  if (na == nb) return {true, "identical", kind()};
  if (nb < na) std::swap(na, nb);
  auto key = std::make_tuple(static_cast<int>(q), na, nb);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  // Asked outside the lock; a concurrent duplicate costs one extra call at most.
  auto verdict = ask(q, na, nb);
  std::lock_guard lock(mutex_);
  return cache_.emplace(std::move(key), std::move(verdict)).first->second;
}

JudgeVerdict LexicalJudge::ask(Question q, const std::string& a, const std::string& b) {
  switch (q) {
    case Question::Object: {
      const bool m = lexicon::lexical_similar(a, b, lex_);
      return {m,
              "head '" + lexicon::head_noun(a, lex_) + "' vs '" + lexicon::head_noun(b, lex_) + "'",
              kind()};
    }
    case Question::Feedback: {
      const auto ca = harness::categorize_feedback(a);
      const auto cb = harness::categorize_feedback(b);
      std::string shared;
      for (auto c : ca) {
        if (cb.contains(c)) {
          if (!shared.empty()) shared += ", ";
          shared += harness::to_string(c);
        }
      }
      return {!shared.empty(), shared.empty() ? "no shared category" : "shared: " + shared, kind()};
    }
    case Question::Change: {
      const auto na = lexicon::extract_nouns(a, lex_);
      const auto nb = lexicon::extract_nouns(b, lex_);
      const auto n = lexicon::noun_overlap(na, nb, lex_);
      return {n > 0, "noun overlap " + std::to_string(n), kind()};
    }
  }
  throw ProviderError("unknown judge question");
}

JudgeVerdict LlmJudge::ask(Question q, const std::string& a, const std::string& b) {
  const char* name = q == Question::Object     ? "judge_object_similarity"
                     : q == Question::Feedback ? "judge_feedback_overlap"
                                               : "judge_main_difference";
  const auto prompt = text::fill_slots(prompts::get(name), {a, b});
  auto reply = provider_.complete(prompt);
  const bool m = parse_yes_no(reply);
  return {m, std::move(reply), kind()};
}

}  // namespace editaudit::providers
