// SPDX-License-Identifier: Apache-2.0
#include "editaudit/harness/harness.hpp"

#include "editaudit/core/image.hpp"
#include "editaudit/core/text.hpp"
#include "editaudit/pipeline/prompts.hpp"
#include "editaudit/triplets/triplets.hpp"

namespace editaudit::harness {

namespace {

std::string_view template_name(QuestionKind q) {
  switch (q) {
    case QuestionKind::Accuracy: return "question_accuracy";
    case QuestionKind::ContextualConsistency: return "question_contextual_consistency";
    case QuestionKind::TechnicalPrecision: return "question_technical_precision";
    case QuestionKind::Artifacts: return "question_artifacts";
    case QuestionKind::DiffCaptionAccuracy: return "question_diff_caption_accuracy";
  }
  throw HarnessError("unknown question");
}

std::vector<providers::ImageInput> both_images(const EditRecord& edit) {
  return {providers::make_image_input(read_image(edit.source_image)),
          providers::make_image_input(read_image(edit.edited_image))};
}

}  // namespace

std::string_view to_string(QuestionKind q) {
  switch (q) {
    case QuestionKind::Accuracy: return "accuracy";
    case QuestionKind::ContextualConsistency: return "contextual_consistency";
    case QuestionKind::TechnicalPrecision: return "technical_precision";
    case QuestionKind::Artifacts: return "artifacts";
    case QuestionKind::DiffCaptionAccuracy: return "diff_caption_accuracy";
  }
  return "?";
}

QuestionKind parse_question(std::string_view text) {
  const auto t = text::to_lower(text::trim(text));
  for (auto q : kAllQuestions)
    if (t == to_string(q)) return q;
  throw HarnessError("unknown question '" + std::string(text) + "'");
}

InspectorQuestion question(QuestionKind kind) {
  const auto name = template_name(kind);
  return {kind, prompts::get(name), prompts::digest(name)};
}

std::string render_question(QuestionKind kind, std::string_view instruction,
                            const std::optional<std::string>& caption) {
  const auto& tmpl = prompts::get(template_name(kind));
  const std::string instr(text::trim(instruction));
  if (instr.empty()) throw HarnessError("empty instruction");
  std::vector<std::string> args;
  if (kind == QuestionKind::DiffCaptionAccuracy) {
    if (!caption || text::trim(*caption).empty())
      throw HarnessError("the caption-accuracy question needs a caption");
    args = {instr, std::string(text::trim(*caption))};
  } else {
    args.assign(text::count_slots(tmpl), instr);
  }
  return text::fill_slots(tmpl, args);
}

bool ask_question(const EditRecord& edit, QuestionKind kind, providers::Provider& provider,
                  const std::optional<std::string>& caption) {
  const auto prompt = render_question(kind, edit.instruction, caption);
  const auto images = both_images(edit);
  return providers::parse_yes_no(provider.complete(prompt, images));
}

std::string generate_caption(const EditRecord& edit, CaptionTask task, providers::Provider& provider) {
  const auto& prompt = prompts::get(task == CaptionTask::AllDifferences ? "caption_all_differences"
                                                                        : "caption_main_difference");
  const auto images = both_images(edit);
  return std::string(text::trim(provider.complete(prompt, images)));
}

std::optional<bool> BinaryLabels::get(QuestionKind q) const {
  switch (q) {
    case QuestionKind::Accuracy: return accurate;
    case QuestionKind::ContextualConsistency: return visually_consistent;
    case QuestionKind::TechnicalPrecision: return technical_ok;
    case QuestionKind::Artifacts: return significant_artifact;
    case QuestionKind::DiffCaptionAccuracy: return caption_accurate;
  }
  return std::nullopt;
}

bool binarize_accuracy(AccuracyLevel level) {
  return level == AccuracyLevel::Accurate || level == AccuracyLevel::AccurateButUnexpected;
}

bool binarize_artifact(ArtifactLevel level) { return level == ArtifactLevel::Significant; }

bool binarize_accuracy(const std::optional<AccuracyLevel>& level) {
  if (!level) throw HarnessError("accuracy level has no majority");
  return binarize_accuracy(*level);
}

bool binarize_artifact(const std::optional<ArtifactLevel>& level) {
  if (!level) throw HarnessError("artifact level has no majority");
  return binarize_artifact(*level);
}

BinaryLabels binarize(const MajorityAnswers& m) {
  BinaryLabels b;
  if (m.accuracy) b.accurate = binarize_accuracy(*m.accuracy);
  if (m.artifact) b.significant_artifact = binarize_artifact(*m.artifact);
  b.technical_ok = m.technical_ok;
  b.visually_consistent = m.visually_consistent;
  b.caption_accurate = m.caption_accepted;
  return b;
}

namespace {

void finish(QuestionScore& s) {
  if (s.evaluated == 0) return;
  s.accuracy = 100.0 * static_cast<double>(s.yes.correct + s.no.correct) /
               static_cast<double>(s.evaluated);
  double sum = 0;
  int classes = 0;
  for (const auto* c : {&s.yes, &s.no}) {
    if (c->support == 0) continue;
    sum += static_cast<double>(c->correct) / static_cast<double>(c->support);
    ++classes;
  }
  s.balanced_accuracy = 100.0 * sum / classes;
}

void tally(QuestionScore& s, bool label, bool pred) {
  ++s.evaluated;
  auto& c = label ? s.yes : s.no;
  ++c.support;
  if (pred == label) ++c.correct;
}

}  // namespace

ScoreReport score(std::string model, const Predictions& preds, const LabelSet& labels,
                  const SliceKeys& slices) {
  for (const auto& [id, _] : preds)
    if (!labels.contains(id)) throw HarnessError("prediction for edit '" + id + "' has no label");
  for (const auto& [id, _] : labels)
    if (!preds.contains(id)) throw HarnessError("label for edit '" + id + "' has no prediction");

  ScoreReport r;
  r.model = std::move(model);
  for (const auto& [id, answers] : preds) {
    const auto& lab = labels.at(id);
    const auto slice_it = slices.find(id);
    for (const auto& [q, pred] : answers) {
      const auto truth = lab.get(q);
      if (!truth) continue;
      tally(r.overall[q], *truth, pred);
      if (slice_it != slices.end())
        for (const auto& key : slice_it->second) tally(r.slices[key][q], *truth, pred);
    }
  }
  for (auto& [_, s] : r.overall) finish(s);
  for (auto& [_, qs] : r.slices)
    for (auto& [__, s] : qs) finish(s);
  return r;
}

namespace {

nlohmann::json to_json(const QuestionScore& s) {
  nlohmann::json j{{"evaluated", s.evaluated},
                   {"support_yes", s.yes.support},
                   {"support_no", s.no.support},
                   {"correct_yes", s.yes.correct},
                   {"correct_no", s.no.correct}};
  j["accuracy"] = s.accuracy ? nlohmann::json(*s.accuracy) : nlohmann::json(nullptr);
  j["balanced_accuracy"] =
      s.balanced_accuracy ? nlohmann::json(*s.balanced_accuracy) : nlohmann::json(nullptr);
  return j;
}

}  // namespace

nlohmann::json to_json(const ScoreReport& r) {
  nlohmann::json overall = nlohmann::json::object();
  for (const auto& [q, s] : r.overall) overall[std::string(to_string(q))] = to_json(s);
  nlohmann::json slices = nlohmann::json::object();
  for (const auto& [key, qs] : r.slices) {
    nlohmann::json js = nlohmann::json::object();
    for (const auto& [q, s] : qs) js[std::string(to_string(q))] = to_json(s);
    slices[key] = js;
  }
  return {{"model", r.model}, {"questions", overall}, {"slices", slices}};
}

nlohmann::json to_json(const BinaryLabels& l) {
  auto opt = [](const std::optional<bool>& b) {
    return b ? nlohmann::json(*b) : nlohmann::json(nullptr);
  };
  return {{"accurate", opt(l.accurate)},
          {"significant_artifact", opt(l.significant_artifact)},
          {"technical_ok", opt(l.technical_ok)},
          {"visually_consistent", opt(l.visually_consistent)},
          {"caption_accurate", opt(l.caption_accurate)}};
}

bool eval_main_difference(std::string_view predicted, std::string_view human,
                          providers::Judge& judge) {
  if (text::trim(predicted).empty() || text::trim(human).empty())
    throw HarnessError("main-difference captions must be non-empty");
  return judge
      .same_change(triplets::extract_main_difference(predicted),
                   triplets::extract_main_difference(human))
      .match;
}

bool compare_feedback(std::string_view model_text, std::string_view human_text,
                      providers::Judge& judge) {
  return judge.feedback_overlap(model_text, human_text).match;
}

}  // namespace editaudit::harness
