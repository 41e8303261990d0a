// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include "editaudit/annotate/store.hpp"
#include "editaudit/report/report.hpp"
#include "test_support.hpp"

using namespace editaudit;
using namespace editaudit::report;
using harness::MajorityAnswers;

namespace {

const std::vector<std::string>* find_row(const Table& t, const std::string& category, const std::string& label) {
  std::string current;
  for (const auto& r : t.rows) {
    if (!r[0].empty()) current = r[0];
    if (current == category && r[1] == label) return &r;
  }
  return nullptr;
}

MajorityAnswers accurate() {
  return {AccuracyLevel::Accurate, ArtifactLevel::NoArtifact, true, true, true};
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(100.0 / 6, 2) == "16.67");
  CHECK(format_number(100.0 / 3, 1) == "33.3");
  CHECK(format_number(200.0 / 3, 1) == "66.7");
  CHECK(format_number(-0.001, 2) == "0.00");
  CHECK(format_number(std::nullopt, 2) == "-");
  CHECK(format_number(7, 0) == "7");
}

TEST_CASE("text tables align values right") {
  const Table t{"T", {"Name", "Value"}, {{"a", "1.5"}, {"longer", "10.25"}}};
  CHECK(render_text(t) ==
        "T\n"
        "Name    Value\n"
        "-------------\n"
        "a         1.5\n"
        "longer  10.25\n");
}

TEST_CASE("distribution of unanimous labels") {
  const std::vector<MajorityAnswers> all(7, accurate());
  const auto r = emit_distribution(all);
  CHECK((*find_row(r.table, "Accuracy Level", "Accurate"))[3] == "100.0");
  CHECK((*find_row(r.table, "Accuracy Level", "Inaccurate"))[3] == "0.0");
  CHECK((*find_row(r.table, "Artifacts Level", "No majority"))[2] == "0");
  CHECK(r.table.title == "Majority vote label distribution (N=7)");
  CHECK(r.data["edits"] == 7);
  CHECK(r.data["categories"].size() == 5);
}

TEST_CASE("distribution rounds to one decimal and counts missing majorities") {
  auto a = accurate();
  auto b = accurate();
  b.accuracy = AccuracyLevel::Inaccurate;
  auto c = accurate();
  c.accuracy.reset();
  c.technical_ok.reset();
  const std::vector<MajorityAnswers> three{a, b, c};
  const auto r = emit_distribution(three);
  CHECK((*find_row(r.table, "Accuracy Level", "Accurate"))[3] == "33.3");
  CHECK((*find_row(r.table, "Accuracy Level", "Inaccurate"))[3] == "33.3");
  CHECK((*find_row(r.table, "Accuracy Level", "No majority"))[3] == "33.3");
  CHECK((*find_row(r.table, "Technical Precision", "Yes"))[3] == "66.7");
  CHECK((*find_row(r.table, "Technical Precision", "No majority"))[2] == "1");

  // Each category's percentages cover every edit.
  for (const auto& cat : r.data["categories"]) {
    double sum = 0;
    std::size_t count = 0;
    for (const auto& l : cat["labels"]) {
      sum += l["percent"].get<double>();
      count += l["count"].get<std::size_t>();
    }
    CHECK(sum == Catch::Approx(100.0));
    CHECK(count == 3);
  }

  std::vector<MajorityAnswers> hundred(100, accurate());
  for (int i = 0; i < 37; ++i) hundred[static_cast<std::size_t>(i)].artifact = ArtifactLevel::Mild;
  const auto h = emit_distribution(hundred);
  CHECK((*find_row(h.table, "Artifacts Level", "Mild"))[3] == "37.0");
  CHECK((*find_row(h.table, "Artifacts Level", "No Artifact"))[3] == "63.0");

  const auto empty = emit_distribution({});
  CHECK(empty.table.rows.empty());
  CHECK(empty.data["edits"] == 0);
}

TEST_CASE("corpus distribution") {
  const auto answers = annotate::load_majority_answers(testing::corpus_dir() / "labels.jsonl");
  std::vector<MajorityAnswers> list;
  for (const auto& [_, a] : answers) list.push_back(a);
  const auto r = emit_distribution(list);
  // Accuracy majorities: seven Accurate-ish, e10 Inaccurate, e07 none.
  CHECK((*find_row(r.table, "Accuracy Level", "No majority"))[3] == "10.0");
  CHECK((*find_row(r.table, "Accuracy Level", "Inaccurate"))[3] == "10.0");
  CHECK((*find_row(r.table, "Artifacts Level", "Significant"))[3] == "20.0");
}

TEST_CASE("comparison table") {
  triplets::MetricReport m;
  m.mp = 100.0 / 6;
  m.hr = 0;
  m.mp_soft = 100.0 / 6;
  m.hr_soft = 0;
  m.avg_diffs_per_edit = 2.5;
  m.no_diff_rate = 24;
  ModelColumn one{"model-a", std::nullopt, m, 50.0};
  const std::vector<ModelColumn> single{one};
  const auto r = emit_comparison(single);
  auto row = [&](const Rendered& x, const std::string& name) {
    for (const auto& cells : x.table.rows)
      if (cells[0] == name) return cells;
    FAIL("no row " << name);
    return std::vector<std::string>{};
  };
  CHECK(row(r, "MP")[1] == "16.67%");
  CHECK(row(r, "HR")[1] == "0.00%");
  CHECK(row(r, "Avg. Diff")[1] == "2.50");
  CHECK(row(r, "No Diffs")[1] == "24.00%");
  CHECK(row(r, "Main Difference")[1] == "50.00%");
  CHECK(row(r, "Accuracy")[1] == "-");
  CHECK(r.table.columns == std::vector<std::string>{"Metric", "model-a"});
  CHECK(r.data["rows"].size() == 12);

  const std::vector<ModelColumn> twins{one, ModelColumn{"model-b", std::nullopt, m, 50.0}};
  const auto t = emit_comparison(twins);
  for (const auto& cells : t.table.rows) CHECK(cells[1] == cells[2]);
  for (const auto& jr : t.data["rows"]) CHECK(jr["values"][0] == jr["values"][1]);
}

TEST_CASE("report json round trips") {
  triplets::MetricReport m;
  m.mp = 12.5;
  m.h_count = 8;
  m.m_count = 3;
  m.matched = 1;
  m.edits = 4;
  m.no_diff_rate = 25;
  const auto back = metric_report_from_json(to_json(m));
  CHECK(back.mp == m.mp);
  CHECK_FALSE(back.hr);
  CHECK(back.h_count == 8);
  CHECK(back.no_diff_rate == 25);

  harness::Predictions preds{{"a", {{harness::QuestionKind::Accuracy, true}}},
                             {"b", {{harness::QuestionKind::Accuracy, false}}}};
  harness::LabelSet labels{{"a", {true, {}, {}, {}, {}}}, {"b", {true, {}, {}, {}, {}}}};
  const auto s = harness::score("m", preds, labels, {{"a", {"k"}}});
  const auto again = score_report_from_json(harness::to_json(s));
  CHECK(again.model == "m");
  CHECK(*again.overall.at(harness::QuestionKind::Accuracy).balanced_accuracy == Catch::Approx(50.0));
  CHECK(again.slices.at("k").at(harness::QuestionKind::Accuracy).evaluated == 1);
}

TEST_CASE("report files carry the digest") {
  testing::TempDir tmp;
  const nlohmann::json meta{{"model", "x"}, {"seed", 1}};
  const auto digest = metadata_digest(meta);
  CHECK(digest.size() == 64);
  CHECK(digest == metadata_digest(nlohmann::json::parse(meta.dump())));
  write_report(tmp.path(), "r", {{"value", 1}}, Table{"T", {"a"}, {{"1"}}}, digest);
  const auto j = nlohmann::json::parse(testing::read_file(tmp / "r.json"));
  CHECK(j["run_metadata_digest"] == digest);
  CHECK(testing::read_file(tmp / "r.txt").ends_with("run-metadata: " + digest + "\n"));
  write_report(tmp.path(), "only", {{"value", 2}}, std::nullopt, digest);
  CHECK_FALSE(std::filesystem::exists(tmp / "only.txt"));
}
