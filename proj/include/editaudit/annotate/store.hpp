// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "editaudit/core/types.hpp"
#include "editaudit/harness/harness.hpp"

namespace editaudit::annotate {

/// Rejected submission or request. `code` is stable for clients:
/// invalid, duplicate, full, unknown-edit, unknown-annotator, no-submissions.
class AnnotateError : public Error {
 public:
  AnnotateError(std::string code, const std::string& what) : Error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

enum class CaptionVerdict { Accepted, Corrected };

struct AnnotationRecord {
  std::string edit_id;
  std::string annotator_id;
  AccuracyLevel accuracy_level = AccuracyLevel::Accurate;
  std::string contextual_feedback;
  bool visually_consistent = true;
  bool technical_ok = true;
  std::string technical_feedback;
  ArtifactLevel artifact_level = ArtifactLevel::NoArtifact;
  CaptionVerdict caption_verdict = CaptionVerdict::Accepted;
  std::string final_caption;
  std::string submitted_at;
  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

nlohmann::json to_json(const AnnotationRecord& r);
/// Throws AnnotateError("invalid") naming the bad field.
AnnotationRecord record_from_json(const nlohmann::json& j);
/// Template invariants: feedback required unless Accurate, caption non-empty.
std::vector<std::string> record_violations(const AnnotationRecord& r);

template <class T>
struct QuestionAggregate {
  std::optional<T> majority;  // >= 2 votes and strictly most frequent
  bool complete_agreement = false;  // >= 2 votes, all identical
  std::map<T, std::size_t> votes;
};

struct MajorityLabels {
  std::string edit_id;
  std::size_t annotator_count = 0;
  QuestionAggregate<AccuracyLevel> accuracy;
  QuestionAggregate<ArtifactLevel> artifact;
  QuestionAggregate<bool> technical_ok;
  QuestionAggregate<bool> visually_consistent;
  QuestionAggregate<bool> caption_accepted;

  harness::MajorityAnswers answers() const;
};

MajorityLabels aggregate_records(std::string edit_id, const std::vector<AnnotationRecord>& recs);
nlohmann::json to_json(const MajorityLabels& m);

struct KappaResult {
  double p_bar = 0;  // mean per-item agreement
  double p_e = 0;    // chance agreement
  double kappa = 0;
};

/// Fleiss' kappa over an items x categories count table. Items with fewer
/// than two ratings are skipped; throws Error when none remain.
KappaResult fleiss_kappa(const std::vector<std::vector<std::size_t>>& table);

struct QuestionAgreement {
  std::size_t items = 0;  // edits with >= 2 annotations
  std::optional<double> average_agreement;
  std::optional<double> complete_agreement_rate;
  std::optional<double> majority_rate;
  std::optional<double> kappa;
};

using AgreementReport = std::map<std::string, QuestionAgreement>;  // keyed by question name
nlohmann::json to_json(const AgreementReport& r);

/// Append-only JSONL store of annotation records for a fixed edit list.
///
/// Each submission is written, flushed and fsynced before submit() returns.
/// The file is held under an exclusive flock for the store's lifetime.
class AnnotationStore {
 public:
  using Clock = std::function<std::string()>;

  AnnotationStore(std::filesystem::path file, std::vector<std::string> edit_ids,
                  std::vector<std::string> annotators, std::size_t per_edit_cap = 3);
  ~AnnotationStore();
  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  /// Unlabelled edit with the fewest submissions (then lowest id) below the cap.
  std::optional<std::string> next_task(std::string_view annotator) const;
  /// Returns the new submission count for the edit.
  std::size_t submit(AnnotationRecord rec);

  std::vector<AnnotationRecord> records_for(std::string_view edit_id) const;
  std::vector<AnnotationRecord> snapshot() const;
  std::size_t submissions(std::string_view edit_id) const;
  bool has_edit(std::string_view edit_id) const;
  bool has_annotator(std::string_view annotator) const;

  MajorityLabels aggregate(std::string_view edit_id) const;
  AgreementReport agreement_report() const;
  /// Header line, then one majority record per annotated edit in id order.
  std::string export_labels() const;

  void set_clock(Clock c) { clock_ = std::move(c); }
  const std::filesystem::path& file() const { return file_; }

 private:
  void check_edit(std::string_view edit_id) const;

  std::filesystem::path file_;
  int fd_ = -1;
  std::vector<std::string> edit_ids_;  // sorted
  std::vector<std::string> annotators_;
  std::size_t cap_;
  std::map<std::string, std::vector<AnnotationRecord>, std::less<>> by_edit_;
  mutable std::shared_mutex mutex_;
  Clock clock_;
};

/// Parsed export_labels output: binarized labels keyed by edit id.
harness::LabelSet parse_labels(std::string_view exported);
harness::LabelSet load_labels(const std::filesystem::path& path);
std::map<std::string, harness::MajorityAnswers> parse_majority_answers(std::string_view exported);
std::map<std::string, harness::MajorityAnswers> load_majority_answers(const std::filesystem::path& path);

}  // namespace editaudit::annotate
