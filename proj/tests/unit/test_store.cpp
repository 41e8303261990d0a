// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <random>

#include "editaudit/annotate/store.hpp"
#include "editaudit/core/text.hpp"
#include "test_support.hpp"

using namespace editaudit;
using namespace editaudit::annotate;

namespace {

const std::vector<std::string> kEdits{"e01", "e02", "e03"};
const std::vector<std::string> kAnnotators{"a1", "a2", "a3", "a4"};

AnnotationRecord rec(std::string edit, std::string annotator, AccuracyLevel acc = AccuracyLevel::Accurate) {
  AnnotationRecord r;
  r.edit_id = std::move(edit);
  r.annotator_id = std::move(annotator);
  r.accuracy_level = acc;
  if (acc != AccuracyLevel::Accurate) r.contextual_feedback = "shape is off";
  r.final_caption = "A dog was added.";
  return r;
}

std::string code_of(auto&& fn) {
  try {
    fn();
  } catch (const AnnotateError& e) {
    return e.code();
  }
  return "none";
}

// Agreement computed from explicit rater pairs rather than category counts.
KappaResult pairwise_kappa(const std::vector<std::vector<int>>& ratings, int categories) {
  double p_sum = 0;
  std::vector<double> totals(static_cast<std::size_t>(categories), 0);
  double all = 0;
  for (const auto& item : ratings) {
    double agree = 0, pairs = 0;
    for (std::size_t i = 0; i < item.size(); ++i)
      for (std::size_t j = 0; j < item.size(); ++j) {
        if (i == j) continue;
        pairs += 1;
        if (item[i] == item[j]) agree += 1;
      }
    p_sum += agree / pairs;
    for (int c : item) totals[static_cast<std::size_t>(c)] += 1;
    all += static_cast<double>(item.size());
  }
  KappaResult r;
  r.p_bar = p_sum / static_cast<double>(ratings.size());
  for (double t : totals) r.p_e += (t / all) * (t / all);
  r.kappa = (r.p_bar - r.p_e) / (1 - r.p_e);
  return r;
}

std::vector<std::vector<std::size_t>> to_table(const std::vector<std::vector<int>>& ratings, int categories) {
  std::vector<std::vector<std::size_t>> t;
  for (const auto& item : ratings) {
    std::vector<std::size_t> row(static_cast<std::size_t>(categories), 0);
    for (int c : item) ++row[static_cast<std::size_t>(c)];
    t.push_back(row);
  }
  return t;
}

}  // namespace

TEST_CASE("record json and validation") {
  auto r = rec("e01", "a1", AccuracyLevel::InaccurateReflects);
  r.visually_consistent = false;
  r.artifact_level = ArtifactLevel::Mild;
  r.caption_verdict = CaptionVerdict::Corrected;
  r.submitted_at = "2026-01-02T03:04:05Z";
  const auto j = to_json(r);
  CHECK(j["visually_consistent"] == "no");
  CHECK(record_from_json(j) == r);

  auto bad = j;
  bad["artifact_level"] = "Catastrophic";
  CHECK(code_of([&] { record_from_json(bad); }) == "invalid");
  bad = j;
  bad["technical_ok"] = "perhaps";
  CHECK(code_of([&] { record_from_json(bad); }) == "invalid");
  bad = j;
  bad.erase("final_caption");
  CHECK(code_of([&] { record_from_json(bad); }) == "invalid");
  CHECK(code_of([&] { record_from_json(nlohmann::json::array()); }) == "invalid");
  bad = j;
  bad["technical_ok"] = true;
  CHECK(record_from_json(bad).technical_ok);

  CHECK(record_violations(rec("e01", "a1")).empty());
  auto missing = rec("e01", "a1", AccuracyLevel::Inaccurate);
  missing.contextual_feedback = "  ";
  CHECK(record_violations(missing).size() == 1);
  missing.final_caption.clear();
  CHECK(record_violations(missing).size() == 2);
}

TEST_CASE("task assignment and submission rules") {
  testing::TempDir tmp;
  AnnotationStore store(tmp / "ann.jsonl", {"e03", "e01", "e02"}, kAnnotators, 2);
  store.set_clock([] { return std::string("2026-01-01T00:00:00Z"); });

  CHECK(store.next_task("a1") == "e01");
  CHECK(store.submit(rec("e01", "a1")) == 1);
  CHECK(store.next_task("a1") == "e02");  // never its own edit again
  CHECK(store.next_task("a2") == "e02");  // fewest submissions first
  CHECK(store.submit(rec("e02", "a2")) == 1);
  CHECK(store.next_task("a3") == "e03");
  CHECK(store.submit(rec("e03", "a3")) == 1);
  CHECK(store.next_task("a3") == "e01");
  CHECK(store.submit(rec("e01", "a2")) == 2);
  CHECK(store.next_task("a4") == "e02");

  CHECK(code_of([&] { store.submit(rec("e01", "a3")); }) == "full");
  CHECK(code_of([&] { store.submit(rec("e02", "a2")); }) == "duplicate");
  CHECK(code_of([&] { store.submit(rec("e99", "a1")); }) == "unknown-edit");
  CHECK(code_of([&] { store.submit(rec("e02", "zed")); }) == "unknown-annotator");
  CHECK(code_of([&] { store.next_task("zed"); }) == "unknown-annotator");
  auto no_feedback = rec("e02", "a1", AccuracyLevel::Inaccurate);
  no_feedback.contextual_feedback.clear();
  CHECK(code_of([&] { store.submit(no_feedback); }) == "invalid");
  CHECK(code_of([&] { store.aggregate("e99"); }) == "unknown-edit");

  CHECK(store.submissions("e01") == 2);
  CHECK(store.records_for("e01")[0].submitted_at == "2026-01-01T00:00:00Z");
  CHECK(store.snapshot().size() == 4);
  CHECK(store.submit(rec("e02", "a3")) == 2);
  CHECK(store.submit(rec("e03", "a4")) == 2);
  CHECK_FALSE(store.next_task("a1"));
}

TEST_CASE("majority needs two votes and a strict plurality") {
  using AL = AccuracyLevel;
  auto agg = [](std::vector<AL> levels) {
    std::vector<AnnotationRecord> rs;
    for (std::size_t i = 0; i < levels.size(); ++i) rs.push_back(rec("e01", "a" + std::to_string(i), levels[i]));
    return aggregate_records("e01", rs);
  };
  CHECK(agg({AL::Accurate, AL::Accurate, AL::AccurateButUnexpected}).accuracy.majority == AL::Accurate);
  CHECK_FALSE(agg({AL::Accurate, AL::AccurateButUnexpected, AL::Inaccurate}).accuracy.majority);
  CHECK_FALSE(agg({AL::Accurate, AL::Inaccurate}).accuracy.majority);
  CHECK_FALSE(agg({AL::Accurate}).accuracy.majority);
  CHECK_FALSE(agg({AL::Accurate}).accuracy.complete_agreement);
  const auto two = agg({AL::Inaccurate, AL::Inaccurate});
  CHECK(two.accuracy.majority == AL::Inaccurate);
  CHECK(two.accuracy.complete_agreement);
  CHECK(two.technical_ok.majority == true);
  CHECK(agg({AL::Accurate, AL::Inaccurate, AL::Inaccurate, AL::Accurate}).accuracy.majority == std::nullopt);
  const auto j = to_json(agg({AL::Accurate, AL::Inaccurate, AL::Accurate}));
  CHECK(j["votes"]["accuracy_level"]["Accurate"] == 2);
  CHECK(j["majority"]["caption_accepted"] == "yes");
}

TEST_CASE("Fleiss' kappa on the textbook table") {
  // Ten subjects, fourteen raters, five categories.
  const std::vector<std::vector<std::size_t>> table{
      {0, 0, 0, 0, 14}, {0, 2, 6, 4, 2}, {0, 0, 3, 5, 6}, {0, 3, 9, 2, 0}, {2, 2, 8, 1, 1},
      {7, 7, 0, 0, 0},  {3, 2, 6, 3, 0}, {2, 5, 3, 2, 2}, {6, 5, 2, 1, 0}, {0, 2, 2, 3, 7}};
  const auto k = fleiss_kappa(table);
  CHECK(k.p_bar == Catch::Approx(0.378).margin(0.0005));
  CHECK(k.p_e == Catch::Approx(0.213).margin(0.0005));
  CHECK(k.kappa == Catch::Approx(0.210).margin(0.0005));
}

TEST_CASE("kappa edge cases") {
  CHECK(fleiss_kappa({{3, 0}, {0, 3}, {3, 0}}).kappa == Catch::Approx(1.0));
  CHECK(fleiss_kappa({{3, 0}, {3, 0}}).kappa == 1.0);  // one category used throughout
  CHECK(fleiss_kappa({{1, 1}, {1, 1}}).kappa == Catch::Approx(-1.0));
  CHECK(fleiss_kappa({{3, 0}, {1, 0}, {0, 3}}).p_bar == Catch::Approx(1.0));  // singleton row skipped
  CHECK_THROWS_AS(fleiss_kappa({{1, 0}, {0, 1}}), Error);
  CHECK_THROWS_AS(fleiss_kappa({}), Error);
}

TEST_CASE("kappa matches pairwise counting and is near zero for random raters") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const int categories = 2 + static_cast<int>(rng() % 4);
    const int raters = 2 + static_cast<int>(rng() % 4);
    std::vector<std::vector<int>> ratings(1 + rng() % 12);
    for (auto& item : ratings)
      for (int r = 0; r < raters; ++r) item.push_back(static_cast<int>(rng() % static_cast<unsigned>(categories)));
    const auto expected = pairwise_kappa(ratings, categories);
    const auto got = fleiss_kappa(to_table(ratings, categories));
    REQUIRE(got.p_bar == Catch::Approx(expected.p_bar));
    REQUIRE(got.p_e == Catch::Approx(expected.p_e));
    if (expected.p_e < 1.0) REQUIRE(got.kappa == Catch::Approx(expected.kappa));
  }

  std::vector<std::vector<int>> random(4000);
  for (auto& item : random)
    for (int r = 0; r < 3; ++r) item.push_back(static_cast<int>(rng() % 4));
  CHECK(std::abs(fleiss_kappa(to_table(random, 4)).kappa) < 0.05);
}

TEST_CASE("corpus annotations export to the fixture labels") {
  testing::TempDir tmp;
  const std::vector<std::string> ids{"e01", "e02", "e03", "e04", "e05", "e06", "e07", "e08", "e09", "e10"};
  const std::vector<std::string> annotators(testing::kCorpusAnnotators.begin(), testing::kCorpusAnnotators.end());
  auto records = testing::corpus_annotations();

  std::string first;
  {
    AnnotationStore store(tmp / "a.jsonl", ids, annotators);
    for (const auto& r : records) store.submit(r);
    first = store.export_labels();
    CHECK(parse_labels(first) == annotate::load_labels(testing::corpus_dir() / "labels.jsonl"));

    const auto report = store.agreement_report();
    const auto& acc = report.at("accuracy_level");
    CHECK(acc.items == 10);
    CHECK(*acc.complete_agreement_rate == Catch::Approx(0.4));  // e02 e03 e08 e09
    CHECK(*acc.majority_rate == Catch::Approx(0.9));            // all but e07
    CHECK(*report.at("artifact_level").complete_agreement_rate == Catch::Approx(0.6));

    const auto answers = parse_majority_answers(first);
    CHECK(answers.at("e10").accuracy == AccuracyLevel::Inaccurate);
    CHECK_FALSE(answers.at("e07").accuracy);
  }

  // Submission order does not change the export.
  std::mt19937 rng(5);
  std::shuffle(records.begin(), records.end(), rng);
  AnnotationStore shuffled(tmp / "b.jsonl", ids, annotators);
  for (const auto& r : records) shuffled.submit(r);
  CHECK(shuffled.export_labels() == first);
}

TEST_CASE("restart restores submissions and seals torn lines") {
  testing::TempDir tmp;
  const auto file = tmp / "ann.jsonl";
  {
    AnnotationStore store(file, kEdits, kAnnotators);
    store.submit(rec("e01", "a1"));
    store.submit(rec("e01", "a2", AccuracyLevel::Inaccurate));
    CHECK_THROWS_AS(AnnotationStore(file, kEdits, kAnnotators), Error);  // held under lock
  }
  const auto content = testing::read_file(file);
  testing::write_file(file, content + R"({"edit_id":"e02","annotator_id":"a1","accura)");
  {
    AnnotationStore store(file, kEdits, kAnnotators);
    CHECK(store.submissions("e01") == 2);
    CHECK(store.submissions("e02") == 0);
    CHECK(store.records_for("e01")[1].accuracy_level == AccuracyLevel::Inaccurate);
    CHECK(code_of([&] { store.submit(rec("e01", "a2")); }) == "duplicate");
    CHECK(store.submit(rec("e02", "a1")) == 1);
  }
  for (const auto& line : text::split(testing::read_file(file), '\n'))
    if (!line.empty()) CHECK(nlohmann::json::accept(line));
  AnnotationStore again(file, kEdits, kAnnotators);
  CHECK(again.submissions("e02") == 1);
  CHECK(again.snapshot().size() == 3);

  testing::write_file(tmp / "bad.jsonl", "{\"edit_id\": 3}\n");
  CHECK_THROWS_WITH(AnnotationStore(tmp / "bad.jsonl", kEdits, kAnnotators), Catch::Matchers::ContainsSubstring("line 1"));
}
