// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <random>

#include "editaudit/core/digest.hpp"
#include "editaudit/core/image.hpp"
#include "editaudit/core/manifest.hpp"
#include "test_support.hpp"

using namespace editaudit;
namespace fs = std::filesystem;

namespace {

void write_gray(const fs::path& path, int w, int h) {
  Image img{w, h, 1, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 0)};
  fs::create_directories(path.parent_path());
  write_png(img, path);
}

std::string record_line(const std::string& id, const std::string& mask = "m.png",
                        const std::string& instruction = "add a dog") {
  return R"({"id":")" + id + R"(","source":"s.png","edited":"e.png","mask":")" + mask +
         R"(","instruction":")" + instruction + R"(","editor":"t"})";
}

struct ManifestDir {
  testing::TempDir dir;
  ManifestDir() {
    write_gray(dir / "s.png", 32, 24);
    write_gray(dir / "e.png", 64, 48);
    write_gray(dir / "m.png", 32, 24);
    write_gray(dir / "small.png", 16, 12);
  }
  fs::path write(const std::string& content) {
    testing::write_file(dir / "manifest.jsonl", content);
    return dir / "manifest.jsonl";
  }
};

std::string message_of(const fs::path& p) {
  try {
    load_manifest(p);
  } catch (const ManifestError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("empty manifest loads zero records") {
  ManifestDir m;
  const auto set = load_manifest(m.write(""));
  CHECK(set.records.empty());
  CHECK(set.manifest_sha256 == sha256_hex(std::string_view{}));
}

TEST_CASE("blank lines are skipped and paths resolve against the manifest") {
  ManifestDir m;
  const auto set = load_manifest(m.write("\n" + record_line("a") + "\n\n" + record_line("b") + "\n"));
  REQUIRE(set.records.size() == 2);
  CHECK(set.records[0].id == "a");
  CHECK(set.records[1].source_image == (m.dir.path() / "s.png").lexically_normal());
  CHECK(set.find("b") == &set.records[1]);
  CHECK(set.find("zzz") == nullptr);
}

TEST_CASE("duplicate ids name both lines") {
  ManifestDir m;
  std::string content;
  for (int i = 1; i <= 8; ++i) {
    const std::string id = (i == 3 || i == 7) ? "dup" : "r" + std::to_string(i);
    content += record_line(id) + "\n";
  }
  const auto msg = message_of(m.write(content));
  CHECK(msg.find("duplicate id 'dup'") != std::string::npos);
  CHECK(msg.find("lines 3 and 7") != std::string::npos);
}

TEST_CASE("invalid records are rejected with a line number") {
  ManifestDir m;
  CHECK(message_of(m.write(record_line("a", "small.png"))).find("mask-dimension-mismatch") != std::string::npos);
  CHECK(message_of(m.write(record_line("a", "m.png", "   "))).find("empty-instruction") != std::string::npos);
  CHECK(message_of(m.write(record_line("a") + "\n" + record_line("b", "nope.png"))).find("line 2") != std::string::npos);
  CHECK(message_of(m.write("{not json")).find("line 1") != std::string::npos);
  CHECK(message_of(m.write(R"({"id":"a"})")).find("missing string field 'source'") != std::string::npos);
  CHECK_THROWS_AS(load_manifest(m.dir / "absent.jsonl"), ManifestError);
}

TEST_CASE("validate_edit reports every violation without throwing") {
  ManifestDir m;
  EditRecord r{"", m.dir / "s.png", m.dir / "missing.png", m.dir / "small.png", "", "t"};
  const auto report = validate_edit(r);
  CHECK(report.has("empty-id"));
  CHECK(report.has("empty-instruction"));
  CHECK(report.has("edited-unreadable"));
  CHECK(report.has("mask-dimension-mismatch"));
  CHECK_FALSE(report.has("source-unreadable"));
}

TEST_CASE("manifest round trip") {
  ManifestDir m;
  const auto first = load_manifest(m.write(record_line("a") + "\n" + record_line("b") + "\n"));
  write_manifest(first, m.dir / "copy.jsonl");
  const auto second = load_manifest(m.dir / "copy.jsonl");
  CHECK(first.records == second.records);
  write_manifest(second, m.dir / "copy2.jsonl");
  CHECK(testing::read_file(m.dir / "copy.jsonl") == testing::read_file(m.dir / "copy2.jsonl"));
}

TEST_CASE("the corpus manifest loads") {
  const auto set = load_manifest(testing::corpus_dir() / "manifest.jsonl");
  CHECK(set.records.size() == 10);
}

TEST_CASE("difference triplets enforce object presence per action") {
  CHECK(DifferenceTriplet::add("dog").target() == "dog");
  CHECK_FALSE(DifferenceTriplet::add("dog").source());
  CHECK(DifferenceTriplet::remove("vase").source() == "vase");
  CHECK(DifferenceTriplet::replace("car", "bus").action() == ActionType::Replace);

  using O = std::optional<std::string>;
  const O none, some = "x";
  // Presence table: Add needs (none, some), Remove (some, none), the others (some, some).
  for (const auto action : kAllActions) {
    for (const auto& src : {none, some})
      for (const auto& tgt : {none, some}) {
        bool ok = false;
        switch (action) {
          case ActionType::Add: ok = !src && tgt; break;
          case ActionType::Remove: ok = src && !tgt; break;
          default: ok = src && tgt; break;
        }
        if (ok)
          CHECK_NOTHROW(DifferenceTriplet(src, tgt, action));
        else
          CHECK_THROWS_AS(DifferenceTriplet(src, tgt, action), InvariantError);
      }
  }
}

TEST_CASE("action names") {
  for (const auto a : kAllActions) CHECK(parse_action(to_string(a)) == a);
  CHECK(to_string(ActionType::ChangeAttribute) == "Change Attribute");
  CHECK(parse_action("delete") == ActionType::Remove);
  CHECK(parse_action("Swap") == ActionType::Replace);
  CHECK(parse_action("modified") == ActionType::ChangeAttribute);
  CHECK(parse_action("ADD") == ActionType::Add);
  CHECK_THROWS_AS(parse_action("None"), ParseError);
  CHECK_THROWS_AS(parse_action("Move"), ParseError);
  CHECK_FALSE(try_parse_action("rotate"));
}

TEST_CASE("level labels round trip") {
  for (const auto a : kAllAccuracyLevels) CHECK(parse_accuracy_level(to_string(a)) == a);
  for (const auto a : kAllArtifactLevels) CHECK(parse_artifact_level(to_string(a)) == a);
  CHECK(to_string(AccuracyLevel::InaccurateReflects) == "Inaccurate, Reflects Instruction");
  CHECK(to_string(AccuracyLevel::AccurateButUnexpected) == "Accurate, But Unexpected");
}
