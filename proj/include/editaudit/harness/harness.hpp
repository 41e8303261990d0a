// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "editaudit/core/types.hpp"
#include "editaudit/providers/judge.hpp"
#include "editaudit/providers/provider.hpp"

namespace editaudit::harness {

class HarnessError : public Error {
 public:
  using Error::Error;
};

enum class QuestionKind {
  Accuracy,
  ContextualConsistency,
  TechnicalPrecision,
  Artifacts,
  DiffCaptionAccuracy
};
inline constexpr std::array<QuestionKind, 5> kAllQuestions = {
    QuestionKind::Accuracy, QuestionKind::ContextualConsistency, QuestionKind::TechnicalPrecision,
    QuestionKind::Artifacts, QuestionKind::DiffCaptionAccuracy};

std::string_view to_string(QuestionKind q);  // "accuracy", "contextual_consistency", ...
QuestionKind parse_question(std::string_view text);

struct InspectorQuestion {
  QuestionKind kind;
  std::string prompt_template;
  std::string template_digest;
};
InspectorQuestion question(QuestionKind kind);

/// Fills the template: the instruction goes in every slot except the
/// caption slot of DiffCaptionAccuracy, which needs `caption`.
std::string render_question(QuestionKind kind, std::string_view instruction,
                            const std::optional<std::string>& caption = std::nullopt);

/// Attaches the source then the edited image at native resolution.
bool ask_question(const EditRecord& edit, QuestionKind kind, providers::Provider& provider,
                  const std::optional<std::string>& caption = std::nullopt);

enum class CaptionTask { AllDifferences, MainDifference };
std::string generate_caption(const EditRecord& edit, CaptionTask task, providers::Provider& provider);

/// Majority answer per question, absent when annotators did not agree.
struct MajorityAnswers {
  std::optional<AccuracyLevel> accuracy;
  std::optional<ArtifactLevel> artifact;
  std::optional<bool> technical_ok;
  std::optional<bool> visually_consistent;
  std::optional<bool> caption_accepted;
};

struct BinaryLabels {
  std::optional<bool> accurate;
  std::optional<bool> significant_artifact;
  std::optional<bool> technical_ok;
  std::optional<bool> visually_consistent;
  std::optional<bool> caption_accurate;
  friend bool operator==(const BinaryLabels&, const BinaryLabels&) = default;

  std::optional<bool> get(QuestionKind q) const;
};

/// Accurate and "Accurate, But Unexpected" are accurate; only Significant
/// counts as an artifact.
bool binarize_accuracy(AccuracyLevel level);
bool binarize_artifact(ArtifactLevel level);
/// Throws HarnessError when there is no majority.
bool binarize_accuracy(const std::optional<AccuracyLevel>& level);
bool binarize_artifact(const std::optional<ArtifactLevel>& level);
/// Questions without a majority stay absent.
BinaryLabels binarize(const MajorityAnswers& majority);

struct ClassStats {
  std::size_t support = 0;
  std::size_t correct = 0;
};

struct QuestionScore {
  std::size_t evaluated = 0;
  ClassStats yes;
  ClassStats no;
  std::optional<double> accuracy;           // percent
  std::optional<double> balanced_accuracy;  // percent, mean recall over present classes
};

using Predictions = std::map<std::string, std::map<QuestionKind, bool>>;
using LabelSet = std::map<std::string, BinaryLabels>;
using SliceKeys = std::map<std::string, std::vector<std::string>>;

struct ScoreReport {
  std::string model;
  std::map<QuestionKind, QuestionScore> overall;
  std::map<std::string, std::map<QuestionKind, QuestionScore>> slices;
};

/// Every predicted edit needs a label entry and vice versa. Questions
/// whose label is absent are skipped for that edit.
ScoreReport score(std::string model, const Predictions& preds, const LabelSet& labels,
                  const SliceKeys& slices = {});

nlohmann::json to_json(const ScoreReport& r);
nlohmann::json to_json(const BinaryLabels& l);

/// Judges whether the first stated change of each caption is the same.
bool eval_main_difference(std::string_view predicted, std::string_view human,
                          providers::Judge& judge);

bool compare_feedback(std::string_view model_text, std::string_view human_text,
                      providers::Judge& judge);

}  // namespace editaudit::harness
