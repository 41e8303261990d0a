// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <sstream>

#include "editaudit/report/cli.hpp"
#include "test_support.hpp"

using namespace editaudit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args, std::shared_ptr<providers::Transport> transport = nullptr) {
  std::vector<const char*> argv{"editaudit"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = cli::run(static_cast<int>(argv.size()), argv.data(), out, err, std::move(transport));
  return {rc, out.str(), err.str()};
}

std::string corpus(const std::string& name) { return (testing::corpus_dir() / name).string(); }

std::vector<std::string> replay(const std::string& sub, const fs::path& out) {
  return {sub, "--provider", corpus("provider.json"), "--cassettes", corpus("cassettes"), "--mode", "replay",
          "--out", out.string()};
}

std::vector<std::string> with(std::vector<std::string> a, std::initializer_list<std::string> more) {
  a.insert(a.end(), more);
  return a;
}

json read_json(const fs::path& p) { return json::parse(testing::read_file(p)); }

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({"frobnicate"}).status != 0);
  CHECK(run({"frobnicate"}).err.find("unknown subcommand") != std::string::npos);
  CHECK(run({}).status != 0);
  CHECK(run({"--version"}).status == 0);

  testing::TempDir tmp;
  CHECK(run({"pipeline", "--out", tmp.path().string()}).status == 2);  // no manifest
  CHECK(run({"artifacts", "--manifest", corpus("manifest.jsonl"), "--exports", corpus("exports"), "--out",
             tmp.path().string(), "--thresholds", "score_drop_threshold=lots"})
            .status == 2);
  CHECK(run({"artifacts", "--manifest", corpus("manifest.jsonl"), "--exports", corpus("exports"), "--out",
             tmp.path().string(), "--thresholds", "bogus=1"})
            .status == 2);
  CHECK(run({"report", "--out", tmp.path().string()}).status == 2);
  CHECK(run({"pipeline", "--mode", "sideways"}).status != 0);

  // Replay against an empty cassette directory misses.
  fs::create_directories(tmp / "empty");
  const auto miss = run({"inspect", "--provider", corpus("provider.json"), "--cassettes", (tmp / "empty").string(),
                         "--mode", "replay", "--manifest", corpus("manifest.jsonl"), "--out",
                         (tmp / "o").string(), "--questions", "accuracy"});
  CHECK(miss.status == 1);
}

TEST_CASE("the installed binary reports unknown subcommands") {
  const char* exe = std::getenv("EDITAUDIT_CLI");
  if (!exe) SKIP("EDITAUDIT_CLI not set");
  const auto cmd = std::string(exe) + " frobnicate > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  CHECK(rc != 0);
  CHECK(std::system((std::string(exe) + " --version > /dev/null 2>&1").c_str()) == 0);
}

TEST_CASE("pipeline replay is byte-identical and matches the fixture") {
  testing::TempDir tmp;
  std::vector<std::string> outputs;
  for (int i = 0; i < 3; ++i) {
    const auto dir = tmp / ("run" + std::to_string(i));
    const auto r = run(with(replay("pipeline", dir), {"--manifest", corpus("manifest.jsonl")}));
    REQUIRE(r.status == 0);
    outputs.push_back(testing::read_file(dir / "pipeline.json"));
    CHECK(testing::read_file(dir / "pipeline.txt").find("run-metadata: ") != std::string::npos);
  }
  CHECK(outputs[0] == outputs[1]);
  CHECK(outputs[1] == outputs[2]);
  const auto got = json::parse(outputs[0]);
  const auto fixture = read_json(testing::corpus_dir() / "pipeline.json");
  CHECK(got["records"] == fixture["records"]);
  CHECK(got["failures"].empty());
  CHECK(got["distribution"]["Add"]["percent"] == 30.0);
  const auto meta = read_json(tmp / "run0" / "run_metadata.json");
  CHECK(meta["cassette_mode"] == "replay");
  CHECK(meta["run_metadata_digest"] == got["run_metadata_digest"]);
}

TEST_CASE("inspect replay scores against the fixture labels") {
  testing::TempDir tmp;
  const auto r = run(with(replay("inspect", tmp.path()), {"--manifest", corpus("manifest.jsonl"), "--pipeline",
                                                          corpus("pipeline.json"), "--labels", corpus("labels.jsonl"),
                                                          "--slices", "action"}));
  REQUIRE(r.status == 0);
  const auto scores = read_json(tmp / "scores.json");
  CHECK(scores["questions"]["accuracy"]["balanced_accuracy"] == Catch::Approx(75.0));
  CHECK(scores["questions"]["artifacts"]["balanced_accuracy"] == Catch::Approx(93.75));
  CHECK(scores["questions"]["diff_caption_accuracy"]["balanced_accuracy"] == Catch::Approx(93.75));
  CHECK(scores["slices"].contains("action=Add"));
  CHECK(read_json(tmp / "predictions.json")["predictions"]["e04"]["technical_precision"] == "no");

  const auto bad = run(with(replay("inspect", tmp / "x"), {"--manifest", corpus("manifest.jsonl"), "--slices", "mood"}));
  CHECK(bad.status == 2);
}

TEST_CASE("artifacts: a stricter drop threshold never flags more") {
  testing::TempDir tmp;
  auto args = [&](const std::string& name, const std::string& t) {
    return std::vector<std::string>{"artifacts", "--manifest", corpus("manifest.jsonl"), "--exports", corpus("exports"),
                                    "--out", (tmp / name).string(), "--thresholds", "score_drop_threshold=" + t};
  };
  REQUIRE(run(args("loose", "0.04")).status == 0);
  REQUIRE(run(args("strict", "0.10")).status == 0);
  const auto loose = read_json(tmp / "loose" / "artifacts.json");
  const auto strict = read_json(tmp / "strict" / "artifacts.json");
  CHECK(strict["flagged"].get<int>() <= loose["flagged"].get<int>());
  CHECK(strict["config"]["score_drop_threshold"] == 0.10);
  for (std::size_t i = 0; i < loose["edits"].size(); ++i)
    CHECK(strict["edits"][i]["findings"].size() <= loose["edits"][i]["findings"].size());

  // e01's bench drops 0.90 -> 0.70 next to the new dog.
  const auto with_pipeline = run({"artifacts", "--manifest", corpus("manifest.jsonl"), "--exports", corpus("exports"),
                                  "--pipeline", corpus("pipeline.json"), "--out", (tmp / "p").string()});
  REQUIRE(with_pipeline.status == 0);
  const auto p = read_json(tmp / "p" / "artifacts.json");
  CHECK(p["edits"][0]["id"] == "e01");
  CHECK(p["edits"][0]["artifact"] == true);
}

TEST_CASE("metrics, augment and report replay") {
  testing::TempDir tmp;
  const auto m = run(with(replay("metrics", tmp / "m"), {"--human", corpus("human.jsonl"), "--model",
                                                         corpus("model.jsonl"), "--model-name", "fixture-vlm"}));
  REQUIRE(m.status == 0);
  const auto metrics = read_json(tmp / "m" / "metrics.json");
  CHECK(metrics["model"] == "fixture-vlm");
  CHECK(metrics["edits"].size() == 10);
  const auto& c = metrics["corpus"];
  CHECK(c["mp"].get<double>() == Catch::Approx(100.0 * c["matched"].get<double>() / c["h_count"].get<double>()));
  CHECK(c["mp_soft"].get<double>() >= c["mp"].get<double>());

  const auto a = run(with(replay("augment", tmp / "a"), {"--manifest", corpus("manifest.jsonl"), "--pipeline",
                                                         corpus("pipeline.json"), "--exports", corpus("exports")}));
  REQUIRE(a.status == 0);
  const auto aug = read_json(tmp / "a" / "augment.json");
  CHECK(aug["total"] == 40);
  CHECK(aug["failures"].empty());

  const auto inspect = run(with(replay("inspect", tmp / "i"), {"--manifest", corpus("manifest.jsonl"), "--pipeline",
                                                               corpus("pipeline.json"), "--labels",
                                                               corpus("labels.jsonl")}));
  REQUIRE(inspect.status == 0);
  const auto rep = run({"report", "--out", (tmp / "r").string(), "--labels", corpus("labels.jsonl"), "--scores",
                        (tmp / "i" / "scores.json").string(), "--metrics", (tmp / "m" / "metrics.json").string()});
  REQUIRE(rep.status == 0);
  CHECK(rep.out.find("Majority vote label distribution (N=10)") != std::string::npos);
  const auto comparison = read_json(tmp / "r" / "comparison.json");
  CHECK(comparison["models"] == json::array({"scripted-vlm", "fixture-vlm"}));
  CHECK(fs::exists(tmp / "r" / "distribution.txt"));
}
