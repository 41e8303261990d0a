// SPDX-License-Identifier: Apache-2.0
#include "editaudit/annotate/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>

#include "editaudit/core/text.hpp"

namespace editaudit::annotate {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view verdict_name(CaptionVerdict v) {
  return v == CaptionVerdict::Accepted ? "accepted" : "corrected";
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool parse_yes_no_field(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_boolean()) return v.get<bool>();
  const auto s = text::to_lower(v.get<std::string>());
  if (s == "yes") return true;
  if (s == "no") return false;
  throw AnnotateError("invalid", std::string(key) + " must be yes or no");
}

}  // namespace

json to_json(const AnnotationRecord& r) {
  return {{"edit_id", r.edit_id},
          {"annotator_id", r.annotator_id},
          {"accuracy_level", to_string(r.accuracy_level)},
          {"contextual_feedback", r.contextual_feedback},
          {"visually_consistent", r.visually_consistent ? "yes" : "no"},
          {"technical_ok", r.technical_ok ? "yes" : "no"},
          {"technical_feedback", r.technical_feedback},
          {"artifact_level", to_string(r.artifact_level)},
          {"caption_verdict", verdict_name(r.caption_verdict)},
          {"final_caption", r.final_caption},
          {"submitted_at", r.submitted_at}};
}

AnnotationRecord record_from_json(const json& j) {
  AnnotationRecord r;
  std::string field;
  try {
    if (!j.is_object()) throw AnnotateError("invalid", "annotation must be a JSON object");
    field = "edit_id";
    r.edit_id = j.at("edit_id").get<std::string>();
    field = "annotator_id";
    r.annotator_id = j.at("annotator_id").get<std::string>();
    field = "accuracy_level";
    r.accuracy_level = parse_accuracy_level(j.at("accuracy_level").get<std::string>());
    field = "contextual_feedback";
    r.contextual_feedback = j.value("contextual_feedback", "");
    field = "visually_consistent";
    r.visually_consistent = parse_yes_no_field(j, "visually_consistent");
    field = "technical_ok";
    r.technical_ok = parse_yes_no_field(j, "technical_ok");
    field = "technical_feedback";
    r.technical_feedback = j.value("technical_feedback", "");
    field = "artifact_level";
    r.artifact_level = parse_artifact_level(j.at("artifact_level").get<std::string>());
    field = "caption_verdict";
    const auto v = text::to_lower(j.at("caption_verdict").get<std::string>());
    if (v == "accepted") r.caption_verdict = CaptionVerdict::Accepted;
    else if (v == "corrected") r.caption_verdict = CaptionVerdict::Corrected;
    else throw AnnotateError("invalid", "caption_verdict must be accepted or corrected");
    field = "final_caption";
    r.final_caption = j.at("final_caption").get<std::string>();
    r.submitted_at = j.value("submitted_at", "");
  } catch (const json::exception& e) {
    throw AnnotateError("invalid", "field '" + field + "': " + e.what());
  } catch (const ParseError& e) {
    throw AnnotateError("invalid", "field '" + field + "': " + e.what());
  }
  return r;
}

std::vector<std::string> record_violations(const AnnotationRecord& r) {
  std::vector<std::string> out;
  if (text::trim(r.edit_id).empty()) out.push_back("edit_id is empty");
  if (text::trim(r.annotator_id).empty()) out.push_back("annotator_id is empty");
  if (r.accuracy_level != AccuracyLevel::Accurate && text::trim(r.contextual_feedback).empty())
    out.push_back("contextual_feedback is required unless the accuracy level is Accurate");
  if (text::trim(r.final_caption).empty()) out.push_back("final_caption is empty");
  return out;
}

namespace {

template <class T>
QuestionAggregate<T> tally(const std::vector<T>& values) {
  QuestionAggregate<T> q;
  for (const auto& v : values) ++q.votes[v];
  std::size_t best = 0, tied = 0;
  std::optional<T> best_value;
  for (const auto& [value, count] : q.votes) {
    if (count > best) {
      best = count;
      best_value = value;
      tied = 1;
    } else if (count == best) {
      ++tied;
    }
  }
  if (best >= 2 && tied == 1) q.majority = best_value;
  q.complete_agreement = values.size() >= 2 && q.votes.size() == 1;
  return q;
}

template <class T, class F>
QuestionAggregate<T> tally(const std::vector<AnnotationRecord>& recs, F&& get) {
  std::vector<T> values;
  values.reserve(recs.size());
  for (const auto& r : recs) values.push_back(get(r));
  return tally(values);
}

template <class T>
json votes_json(const QuestionAggregate<T>& q, auto&& name) {
  json j = json::object();
  for (const auto& [v, c] : q.votes) j[std::string(name(v))] = c;
  return j;
}

}  // namespace

MajorityLabels aggregate_records(std::string edit_id, const std::vector<AnnotationRecord>& recs) {
  MajorityLabels m;
  m.edit_id = std::move(edit_id);
  m.annotator_count = recs.size();
  m.accuracy = tally<AccuracyLevel>(recs, [](const auto& r) { return r.accuracy_level; });
  m.artifact = tally<ArtifactLevel>(recs, [](const auto& r) { return r.artifact_level; });
  m.technical_ok = tally<bool>(recs, [](const auto& r) { return r.technical_ok; });
  m.visually_consistent = tally<bool>(recs, [](const auto& r) { return r.visually_consistent; });
  m.caption_accepted = tally<bool>(
      recs, [](const auto& r) { return r.caption_verdict == CaptionVerdict::Accepted; });
  return m;
}

harness::MajorityAnswers MajorityLabels::answers() const {
  return {accuracy.majority, artifact.majority, technical_ok.majority, visually_consistent.majority,
          caption_accepted.majority};
}

json to_json(const MajorityLabels& m) {
  auto yn = [](bool b) { return b ? "yes" : "no"; };
  auto opt = [](const auto& o, auto&& name) { return o ? json(name(*o)) : json(nullptr); };
  auto acc_name = [](AccuracyLevel a) { return to_string(a); };
  auto art_name = [](ArtifactLevel a) { return to_string(a); };
  return {
      {"id", m.edit_id},
      {"annotators", m.annotator_count},
      {"majority",
       {{"accuracy_level", opt(m.accuracy.majority, acc_name)},
        {"artifact_level", opt(m.artifact.majority, art_name)},
        {"technical_ok", opt(m.technical_ok.majority, yn)},
        {"visually_consistent", opt(m.visually_consistent.majority, yn)},
        {"caption_accepted", opt(m.caption_accepted.majority, yn)}}},
      {"complete_agreement",
       {{"accuracy_level", m.accuracy.complete_agreement},
        {"artifact_level", m.artifact.complete_agreement},
        {"technical_ok", m.technical_ok.complete_agreement},
        {"visually_consistent", m.visually_consistent.complete_agreement},
        {"caption_accepted", m.caption_accepted.complete_agreement}}},
      {"votes",
       {{"accuracy_level", votes_json(m.accuracy, acc_name)},
        {"artifact_level", votes_json(m.artifact, art_name)},
        {"technical_ok", votes_json(m.technical_ok, yn)},
        {"visually_consistent", votes_json(m.visually_consistent, yn)},
        {"caption_accepted", votes_json(m.caption_accepted, yn)}}},
  };
}

KappaResult fleiss_kappa(const std::vector<std::vector<std::size_t>>& table) {
  std::vector<double> category_totals;
  double total_ratings = 0;
  double p_sum = 0;
  std::size_t items = 0;
  for (const auto& row : table) {
    std::size_t n = 0;
    for (auto c : row) n += c;
    if (n < 2) continue;
    if (category_totals.size() < row.size()) category_totals.resize(row.size(), 0);
    double agree = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const auto c = static_cast<double>(row[j]);
      agree += c * (c - 1.0);
      category_totals[j] += static_cast<double>(row[j]);
    }
    p_sum += agree / (static_cast<double>(n) * static_cast<double>(n - 1));
    total_ratings += static_cast<double>(n);
    ++items;
  }
  if (items == 0) throw Error("Fleiss' kappa needs at least one item with two ratings");
  KappaResult r;
  r.p_bar = p_sum / static_cast<double>(items);
  for (double t : category_totals) {
    const double p = t / total_ratings;
    r.p_e += p * p;
  }
  // Every rating in one category: chance agreement is total, and so is the observed one.
  r.kappa = r.p_e >= 1.0 ? 1.0 : (r.p_bar - r.p_e) / (1.0 - r.p_e);
  return r;
}

json to_json(const AgreementReport& r) {
  json j = json::object();
  auto opt = [](const std::optional<double>& d) { return d ? json(*d) : json(nullptr); };
  for (const auto& [q, a] : r) {
    j[q] = {{"items", a.items},
            {"average_agreement", opt(a.average_agreement)},
            {"complete_agreement_rate", opt(a.complete_agreement_rate)},
            {"majority_rate", opt(a.majority_rate)},
            {"kappa", opt(a.kappa)}};
  }
  return j;
}

AnnotationStore::AnnotationStore(fs::path file, std::vector<std::string> edit_ids,
                                 std::vector<std::string> annotators, std::size_t per_edit_cap)
    : file_(std::move(file)),
      edit_ids_(std::move(edit_ids)),
      annotators_(std::move(annotators)),
      cap_(per_edit_cap),
      clock_(utc_now) {
  std::sort(edit_ids_.begin(), edit_ids_.end());
  if (std::adjacent_find(edit_ids_.begin(), edit_ids_.end()) != edit_ids_.end())
    throw Error("annotation store: duplicate edit id");
  if (cap_ < 1) throw Error("annotation store: cap must be >= 1");
  if (file_.has_parent_path()) fs::create_directories(file_.parent_path());

  fd_ = ::open(file_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error("cannot open " + file_.string() + ": " + std::strerror(errno));
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    throw Error(file_.string() + " is locked by another writer");
  }

  std::ifstream in(file_, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    const bool complete = end != std::string::npos;
    if (!complete) end = content.size();
    ++line_no;
    const auto line_start = start;
    const auto line = std::string_view(content).substr(start, end - start);
    start = end + 1;
    if (!complete) {
      // A torn write that was never acknowledged; drop it so the next
      // append starts on a fresh line.
      if (::ftruncate(fd_, static_cast<off_t>(line_start)) != 0 || ::fsync(fd_) != 0)
        throw Error("cannot repair " + file_.string());
      break;
    }
    if (text::trim(line).empty()) continue;
    AnnotationRecord rec;
    try {
      rec = record_from_json(json::parse(line));
    } catch (const std::exception& e) {
      throw Error(file_.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
    by_edit_[rec.edit_id].push_back(std::move(rec));
  }
}

AnnotationStore::~AnnotationStore() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

bool AnnotationStore::has_edit(std::string_view id) const {
  return std::binary_search(edit_ids_.begin(), edit_ids_.end(), id);
}

bool AnnotationStore::has_annotator(std::string_view a) const {
  return std::find(annotators_.begin(), annotators_.end(), a) != annotators_.end();
}

void AnnotationStore::check_edit(std::string_view id) const {
  if (!has_edit(id)) throw AnnotateError("unknown-edit", "unknown edit '" + std::string(id) + "'");
}

std::optional<std::string> AnnotationStore::next_task(std::string_view annotator) const {
  if (!has_annotator(annotator))
    throw AnnotateError("unknown-annotator", "unknown annotator '" + std::string(annotator) + "'");
  std::shared_lock lock(mutex_);
  std::optional<std::string> best;
  std::size_t best_count = 0;
  for (const auto& id : edit_ids_) {
    const auto it = by_edit_.find(id);
    const std::size_t n = it == by_edit_.end() ? 0 : it->second.size();
    if (n >= cap_) continue;
    if (it != by_edit_.end() &&
        std::any_of(it->second.begin(), it->second.end(),
                    [&](const auto& r) { return r.annotator_id == annotator; }))
      continue;
    if (!best || n < best_count) {
      best = id;
      best_count = n;
    }
  }
  return best;
}

std::size_t AnnotationStore::submit(AnnotationRecord rec) {
  if (const auto v = record_violations(rec); !v.empty()) {
    std::string msg;
    for (const auto& s : v) msg += (msg.empty() ? "" : "; ") + s;
    throw AnnotateError("invalid", msg);
  }
  check_edit(rec.edit_id);
  if (!has_annotator(rec.annotator_id))
    throw AnnotateError("unknown-annotator", "unknown annotator '" + rec.annotator_id + "'");

  std::unique_lock lock(mutex_);
  auto& list = by_edit_[rec.edit_id];
  if (std::any_of(list.begin(), list.end(),
                  [&](const auto& r) { return r.annotator_id == rec.annotator_id; }))
    throw AnnotateError("duplicate", rec.annotator_id + " already annotated " + rec.edit_id);
  if (list.size() >= cap_)
    throw AnnotateError("full", rec.edit_id + " already has " + std::to_string(cap_) + " annotations");
  if (rec.submitted_at.empty()) rec.submitted_at = clock_();

  const auto line = to_json(rec).dump() + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const auto n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error("write to " + file_.string() + " failed: " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) throw Error("fsync of " + file_.string() + " failed");
  list.push_back(std::move(rec));
  return list.size();
}

std::vector<AnnotationRecord> AnnotationStore::records_for(std::string_view edit_id) const {
  check_edit(edit_id);
  std::shared_lock lock(mutex_);
  const auto it = by_edit_.find(edit_id);
  return it == by_edit_.end() ? std::vector<AnnotationRecord>{} : it->second;
}

std::vector<AnnotationRecord> AnnotationStore::snapshot() const {
  std::shared_lock lock(mutex_);
  std::vector<AnnotationRecord> out;
  for (const auto& [_, list] : by_edit_) out.insert(out.end(), list.begin(), list.end());
  return out;
}

std::size_t AnnotationStore::submissions(std::string_view edit_id) const {
  std::shared_lock lock(mutex_);
  const auto it = by_edit_.find(edit_id);
  return it == by_edit_.end() ? 0 : it->second.size();
}

MajorityLabels AnnotationStore::aggregate(std::string_view edit_id) const {
  auto recs = records_for(edit_id);
  if (recs.empty())
    throw AnnotateError("no-submissions", "edit '" + std::string(edit_id) + "' has no annotations");
  return aggregate_records(std::string(edit_id), recs);
}

namespace {

template <class T>
void add_question(AgreementReport& report, const std::string& name,
                  const std::vector<MajorityLabels>& all,
                  const QuestionAggregate<T> MajorityLabels::*field,
                  const std::vector<T>& categories) {
  QuestionAgreement qa;
  std::vector<std::vector<std::size_t>> table;
  double complete = 0, majority = 0;
  for (const auto& m : all) {
    if (m.annotator_count < 2) continue;
    const auto& q = m.*field;
    std::vector<std::size_t> row;
    for (const auto& c : categories) {
      const auto it = q.votes.find(c);
      row.push_back(it == q.votes.end() ? 0 : it->second);
    }
    table.push_back(std::move(row));
    if (q.complete_agreement) ++complete;
    if (q.majority) ++majority;
  }
  qa.items = table.size();
  if (!table.empty()) {
    const auto k = fleiss_kappa(table);
    qa.average_agreement = k.p_bar;
    qa.kappa = k.kappa;
    qa.complete_agreement_rate = complete / static_cast<double>(table.size());
    qa.majority_rate = majority / static_cast<double>(table.size());
  }
  report[name] = qa;
}

}  // namespace

AgreementReport AnnotationStore::agreement_report() const {
  std::vector<MajorityLabels> all;
  {
    std::shared_lock lock(mutex_);
    for (const auto& [id, list] : by_edit_)
      if (!list.empty()) all.push_back(aggregate_records(id, list));
  }
  AgreementReport r;
  add_question(r, "accuracy_level", all, &MajorityLabels::accuracy,
               std::vector<AccuracyLevel>(kAllAccuracyLevels.begin(), kAllAccuracyLevels.end()));
  add_question(r, "artifact_level", all, &MajorityLabels::artifact,
               std::vector<ArtifactLevel>(kAllArtifactLevels.begin(), kAllArtifactLevels.end()));
  add_question(r, "technical_ok", all, &MajorityLabels::technical_ok, std::vector<bool>{true, false});
  add_question(r, "visually_consistent", all, &MajorityLabels::visually_consistent,
               std::vector<bool>{true, false});
  add_question(r, "caption_accepted", all, &MajorityLabels::caption_accepted,
               std::vector<bool>{true, false});
  return r;
}

std::string AnnotationStore::export_labels() const {
  std::ostringstream out;
  out << json{{"format", "editaudit-labels"}, {"version", 1}}.dump() << '\n';
  std::shared_lock lock(mutex_);
  for (const auto& [id, list] : by_edit_) {  // std::map: id order
    if (list.empty()) continue;
    const auto m = aggregate_records(id, list);
    auto j = to_json(m);
    j["binary"] = harness::to_json(harness::binarize(m.answers()));
    out << j.dump() << '\n';
  }
  return out.str();
}

namespace {

template <class F>
void for_each_label_line(std::string_view exported, F&& f) {
  std::size_t line_no = 0;
  for (const auto& line : text::split(exported, '\n')) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error("labels line " + std::to_string(line_no) + ": " + e.what());
    }
    if (line_no == 1) {
      if (j.value("format", "") != "editaudit-labels") throw Error("not a labels export");
      continue;
    }
    f(j);
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read labels " + path.string());
  return {(std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()};
}

}  // namespace

harness::LabelSet parse_labels(std::string_view exported) {
  harness::LabelSet out;
  for_each_label_line(exported, [&](const json& j) {
    const auto& b = j.at("binary");
    auto opt = [&](const char* k) -> std::optional<bool> {
      return b.at(k).is_null() ? std::nullopt : std::optional<bool>(b.at(k).get<bool>());
    };
    out[j.at("id").get<std::string>()] =
        harness::BinaryLabels{opt("accurate"), opt("significant_artifact"), opt("technical_ok"),
                              opt("visually_consistent"), opt("caption_accurate")};
  });
  return out;
}

std::map<std::string, harness::MajorityAnswers> parse_majority_answers(std::string_view exported) {
  std::map<std::string, harness::MajorityAnswers> out;
  for_each_label_line(exported, [&](const json& j) {
    const auto& m = j.at("majority");
    auto yn = [&](const char* k) -> std::optional<bool> {
      if (m.at(k).is_null()) return std::nullopt;
      return m.at(k).get<std::string>() == "yes";
    };
    harness::MajorityAnswers a;
    if (!m.at("accuracy_level").is_null())
      a.accuracy = parse_accuracy_level(m.at("accuracy_level").get<std::string>());
    if (!m.at("artifact_level").is_null())
      a.artifact = parse_artifact_level(m.at("artifact_level").get<std::string>());
    a.technical_ok = yn("technical_ok");
    a.visually_consistent = yn("visually_consistent");
    a.caption_accepted = yn("caption_accepted");
    out[j.at("id").get<std::string>()] = a;
  });
  return out;
}

std::map<std::string, harness::MajorityAnswers> load_majority_answers(const fs::path& path) {
  return parse_majority_answers(read_file(path));
}

harness::LabelSet load_labels(const fs::path& path) { return parse_labels(read_file(path)); }

}  // namespace editaudit::annotate
