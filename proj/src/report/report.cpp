// SPDX-License-Identifier: Apache-2.0
#include "editaudit/report/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>

#include "editaudit/core/digest.hpp"

namespace editaudit::report {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(std::optional<double> v, int decimals) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
  std::string s = buf;
  if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string render_text(const Table& t) {
  std::vector<std::size_t> width(t.columns.size(), 0);
  auto widen = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i)
      width[i] = std::max(width[i], row[i].size());
  };
  widen(t.columns);
  for (const auto& r : t.rows) widen(r);

  auto line = [&](const std::vector<std::string>& row) {
    std::string out;
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string cell = i < row.size() ? row[i] : "";
      const std::string pad(width[i] - cell.size(), ' ');
      if (i > 0) out += "  ";
      out += i == 0 ? cell + pad : pad + cell;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out;
  if (!t.title.empty()) out += t.title + "\n";
  out += line(t.columns);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + "\n";
  for (const auto& r : t.rows) out += line(r);
  return out;
}

namespace {

struct Category {
  std::string name;
  std::vector<std::string> values;  // in display order
  std::vector<std::size_t> counts;
  std::size_t no_majority = 0;
};

template <class T>
void count_into(Category& c, const std::optional<T>& v, auto&& label) {
  if (!v) {
    ++c.no_majority;
    return;
  }
  const auto name = std::string(label(*v));
  const auto it = std::find(c.values.begin(), c.values.end(), name);
  ++c.counts[static_cast<std::size_t>(it - c.values.begin())];
}

}  // namespace

Rendered emit_distribution(std::span<const harness::MajorityAnswers> answers) {
  auto yn = [](bool b) { return b ? "Yes" : "No"; };
  std::vector<Category> cats;
  {
    Category acc{"Accuracy Level", {}, {}, 0};
    for (auto a : kAllAccuracyLevels) acc.values.emplace_back(to_string(a));
    Category art{"Artifacts Level", {}, {}, 0};
    for (auto a : kAllArtifactLevels) art.values.emplace_back(to_string(a));
    cats = {acc, art, {"Technical Precision", {"Yes", "No"}, {}, 0},
            {"Visual Consistency", {"Yes", "No"}, {}, 0},
            {"Diff Caption Accuracy", {"Yes", "No"}, {}, 0}};
    for (auto& c : cats) c.counts.assign(c.values.size(), 0);
  }
  for (const auto& a : answers) {
    count_into(cats[0], a.accuracy, [](AccuracyLevel l) { return to_string(l); });
    count_into(cats[1], a.artifact, [](ArtifactLevel l) { return to_string(l); });
    count_into(cats[2], a.technical_ok, yn);
    count_into(cats[3], a.visually_consistent, yn);
    count_into(cats[4], a.caption_accepted, yn);
  }

  const std::size_t n = answers.size();
  auto pct = [&](std::size_t k) -> std::optional<double> {
    if (n == 0) return std::nullopt;
    return 100.0 * static_cast<double>(k) / static_cast<double>(n);
  };
  Rendered out;
  out.table.title = "Majority vote label distribution (N=" + std::to_string(n) + ")";
  out.table.columns = {"Category", "Label", "Count", "%"};
  out.data = {{"edits", n}, {"decimals", 1}, {"categories", json::array()}};
  if (n == 0) return out;  // headers only
  for (const auto& c : cats) {
    json jc{{"category", c.name}, {"labels", json::array()}};
    for (std::size_t i = 0; i <= c.values.size(); ++i) {
      const bool nm = i == c.values.size();
      const auto label = nm ? std::string("No majority") : c.values[i];
      const auto count = nm ? c.no_majority : c.counts[i];
      out.table.rows.push_back({i == 0 ? c.name : "", label, std::to_string(count),
                                format_number(pct(count), 1)});
      const auto p = pct(count);
      jc["labels"].push_back({{"label", label}, {"count", count}, {"percent", p ? json(*p) : json(nullptr)}});
    }
    out.data["categories"].push_back(jc);
  }
  return out;
}

Rendered emit_comparison(std::span<const ModelColumn> models) {
  struct Row {
    std::string name;
    std::string key;
    std::function<std::optional<double>(const ModelColumn&)> get;
  };
  auto question = [](harness::QuestionKind q) {
    return [q](const ModelColumn& m) -> std::optional<double> {
      if (!m.scores) return std::nullopt;
      const auto it = m.scores->overall.find(q);
      return it == m.scores->overall.end() ? std::nullopt : it->second.balanced_accuracy;
    };
  };
  auto metric = [](auto field) {
    return [field](const ModelColumn& m) -> std::optional<double> {
      if (!m.metrics) return std::nullopt;
      return field(*m.metrics);
    };
  };
  using harness::QuestionKind;
  const std::vector<Row> rows = {
      {"Accuracy", "accuracy", question(QuestionKind::Accuracy)},
      {"Contextual Consistency", "contextual_consistency", question(QuestionKind::ContextualConsistency)},
      {"Technical Precision", "technical_precision", question(QuestionKind::TechnicalPrecision)},
      {"Artifacts", "artifacts", question(QuestionKind::Artifacts)},
      {"Diff Caption Accuracy", "diff_caption_accuracy", question(QuestionKind::DiffCaptionAccuracy)},
      {"Main Difference", "main_difference",
       [](const ModelColumn& m) { return m.main_difference; }},
      {"MP", "mp", metric([](const triplets::MetricReport& r) { return r.mp; })},
      {"MP_soft", "mp_soft", metric([](const triplets::MetricReport& r) { return r.mp_soft; })},
      {"HR", "hr", metric([](const triplets::MetricReport& r) { return r.hr; })},
      {"HR_soft", "hr_soft", metric([](const triplets::MetricReport& r) { return r.hr_soft; })},
      {"Avg. Diff", "avg_diff",
       metric([](const triplets::MetricReport& r) -> std::optional<double> { return r.avg_diffs_per_edit; })},
      {"No Diffs", "no_diffs",
       metric([](const triplets::MetricReport& r) -> std::optional<double> { return r.no_diff_rate; })},
  };

  Rendered out;
  out.table.title = "Model comparison";
  out.table.columns = {"Metric"};
  for (const auto& m : models) out.table.columns.push_back(m.model);
  out.data = {{"decimals", 2}, {"models", json::array()}, {"rows", json::array()}};
  for (const auto& m : models) out.data["models"].push_back(m.model);
  for (const auto& r : rows) {
    std::vector<std::string> cells{r.name};
    json values = json::array();
    for (const auto& m : models) {
      const auto v = r.get(m);
      const bool percent = r.key != "avg_diff";
      cells.push_back(format_number(v, 2) + (v && percent ? "%" : ""));
      values.push_back(v ? json(*v) : json(nullptr));
    }
    out.table.rows.push_back(std::move(cells));
    out.data["rows"].push_back({{"metric", r.key}, {"label", r.name}, {"values", values}});
  }
  return out;
}

json to_json(const triplets::MetricReport& r) {
  auto opt = [](const std::optional<double>& d) { return d ? json(*d) : json(nullptr); };
  return {{"mp", opt(r.mp)},
          {"hr", opt(r.hr)},
          {"mp_soft", opt(r.mp_soft)},
          {"hr_soft", opt(r.hr_soft)},
          {"h_count", r.h_count},
          {"m_count", r.m_count},
          {"matched", r.matched},
          {"matched_soft", r.matched_soft},
          {"edits", r.edits},
          {"avg_diffs_per_edit", r.avg_diffs_per_edit},
          {"no_diff_rate", r.no_diff_rate}};
}

triplets::MetricReport metric_report_from_json(const json& j) {
  auto opt = [&](const char* k) -> std::optional<double> {
    return !j.contains(k) || j.at(k).is_null() ? std::nullopt : std::optional<double>(j.at(k).get<double>());
  };
  triplets::MetricReport r;
  r.mp = opt("mp");
  r.hr = opt("hr");
  r.mp_soft = opt("mp_soft");
  r.hr_soft = opt("hr_soft");
  r.h_count = j.value("h_count", std::size_t{0});
  r.m_count = j.value("m_count", std::size_t{0});
  r.matched = j.value("matched", std::size_t{0});
  r.matched_soft = j.value("matched_soft", std::size_t{0});
  r.edits = j.value("edits", std::size_t{0});
  r.avg_diffs_per_edit = j.value("avg_diffs_per_edit", 0.0);
  r.no_diff_rate = j.value("no_diff_rate", 0.0);
  return r;
}

harness::ScoreReport score_report_from_json(const json& j) {
  harness::ScoreReport r;
  r.model = j.at("model").get<std::string>();
  auto read = [](const json& jq) {
    harness::QuestionScore s;
    s.evaluated = jq.at("evaluated");
    s.yes.support = jq.at("support_yes");
    s.no.support = jq.at("support_no");
    s.yes.correct = jq.at("correct_yes");
    s.no.correct = jq.at("correct_no");
    if (!jq.at("accuracy").is_null()) s.accuracy = jq.at("accuracy").get<double>();
    if (!jq.at("balanced_accuracy").is_null())
      s.balanced_accuracy = jq.at("balanced_accuracy").get<double>();
    return s;
  };
  for (const auto& [q, jq] : j.at("questions").items()) r.overall[harness::parse_question(q)] = read(jq);
  if (j.contains("slices"))
    for (const auto& [key, js] : j.at("slices").items())
      for (const auto& [q, jq] : js.items()) r.slices[key][harness::parse_question(q)] = read(jq);
  return r;
}

std::string metadata_digest(const json& metadata) { return sha256_hex(metadata.dump()); }

void write_report(const fs::path& dir, const std::string& stem, json data,
                  const std::optional<Table>& table, const std::string& digest) {
  fs::create_directories(dir);
  data["run_metadata_digest"] = digest;
  {
    std::ofstream out(dir / (stem + ".json"), std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / (stem + ".json")).string());
    out << data.dump(2) << '\n';
  }
  if (table) {
    std::ofstream out(dir / (stem + ".txt"), std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / (stem + ".txt")).string());
    out << render_text(*table) << "run-metadata: " << digest << '\n';
  }
}

}  // namespace editaudit::report
