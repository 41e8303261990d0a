// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "editaudit/core/parallel.hpp"
#include "editaudit/providers/provider.hpp"
#include "test_support.hpp"

using namespace editaudit;
using namespace editaudit::providers;
using nlohmann::json;

namespace {

std::shared_ptr<testing::ScriptedTransport> floor_transport() {
  auto t = std::make_shared<testing::ScriptedTransport>();
  t->on_prompt("Describe the floor.", "a wooden floor");
  return t;
}

ImageInput tiny_image(std::uint8_t value) {
  return make_image_input(Image{2, 2, 1, {value, value, value, value}});
}

}  // namespace

TEST_CASE("provider config validation") {
  auto cfg = testing::fixture_provider_config();
  CHECK_NOTHROW(validate(cfg));
  cfg.max_parallel = 0;
  CHECK_THROWS_AS(validate(cfg), ProviderError);
  cfg = testing::fixture_provider_config();
  cfg.retry.attempts = 0;
  CHECK_THROWS_AS(validate(cfg), ProviderError);

  const json ok = {{"provider_id", "p"}, {"model", "m"}, {"endpoint", "http://x/v1"},
                   {"credential_env", "SOME_KEY"}, {"max_parallel", 3}};
  CHECK(config_from_json(ok).max_parallel == 3);
  json inline_key = ok;
  inline_key["credential"] = "sk-123";
  CHECK_THROWS_AS(config_from_json(inline_key), ProviderError);
  json bad_api = ok;
  bad_api["api"] = "carrier-pigeon";
  CHECK_THROWS_AS(config_from_json(bad_api), ProviderError);
}

TEST_CASE("request digests depend on every addressed field") {
  const std::vector<std::string> imgs{"aa", "bb"};
  const auto d = request_digest("p", "m", "hello", imgs);
  CHECK(d.size() == 64);
  CHECK(d == request_digest("p", "m", "hello", imgs));
  CHECK(d != request_digest("q", "m", "hello", imgs));
  CHECK(d != request_digest("p", "n", "hello", imgs));
  CHECK(d != request_digest("p", "m", "hello!", imgs));
  const std::vector<std::string> swapped{"bb", "aa"};
  CHECK(d != request_digest("p", "m", "hello", swapped));
  // field boundaries are not ambiguous
  CHECK(request_digest("ab", "c", "x", {}) != request_digest("a", "bc", "x", {}));
}

TEST_CASE("live mode always calls the transport") {
  auto t = floor_transport();
  Provider p(testing::fixture_provider_config(), t, CassetteMode::Live);
  CHECK(p.complete("Describe the floor.") == "a wooden floor");
  CHECK(p.complete("Describe the floor.") == "a wooden floor");
  CHECK(t->calls() == 2);
}

TEST_CASE("record then replay") {
  testing::TempDir dir;
  auto t = floor_transport();
  const auto img = tiny_image(7);
  {
    Provider rec(testing::fixture_provider_config(), t, CassetteMode::Record, dir.path());
    CHECK(rec.describe_image(img, "Describe the floor.") == "a wooden floor");
    CHECK(rec.describe_image(img, "Describe the floor.") == "a wooden floor");
    CHECK(t->calls() == 1);
    CHECK(rec.cassette_hits() == 1);
  }
  const auto digest = request_digest("fixture", "scripted-vlm", "Describe the floor.",
                                     std::vector<std::string>{img.digest});
  const auto stored = CassetteStore(dir.path()).load(digest);
  REQUIRE(stored);
  CHECK(stored->response_text == "a wooden floor");
  CHECK(stored->image_digests == std::vector<std::string>{img.digest});

  Provider replay(testing::fixture_provider_config(), nullptr, CassetteMode::Replay, dir.path());
  CHECK(replay.describe_image(img, "Describe the floor.") == "a wooden floor");
  CHECK(replay.transport_calls() == 0);

  try {
    replay.describe_image(tiny_image(8), "Describe the floor.");
    FAIL("expected a replay miss");
  } catch (const ReplayMissError& e) {
    CHECK(e.digest() == request_digest("fixture", "scripted-vlm", "Describe the floor.",
                                       std::vector<std::string>{tiny_image(8).digest}));
  }
}

TEST_CASE("modes require their collaborators") {
  CHECK_THROWS_AS(Provider(testing::fixture_provider_config(), nullptr, CassetteMode::Replay), ProviderError);
  testing::TempDir dir;
  CHECK_THROWS_AS(Provider(testing::fixture_provider_config(), nullptr, CassetteMode::Record, dir.path()),
                  ProviderError);
  CHECK(parse_mode("replay") == CassetteMode::Replay);
  CHECK_THROWS_AS(parse_mode("rewind"), ProviderError);
}

TEST_CASE("empty prompts and empty replies are errors") {
  auto t = std::make_shared<testing::ScriptedTransport>();
  t->on_prompt("say nothing", "   ");
  Provider p(testing::fixture_provider_config(), t, CassetteMode::Live);
  CHECK_THROWS_AS(p.complete(""), ProviderError);
  CHECK_THROWS_AS(p.complete("  \n"), ProviderError);
  CHECK(t->calls() == 0);
  CHECK_THROWS_AS(p.complete("say nothing"), ProviderError);
}

TEST_CASE("retryable failures are retried with growing backoff") {
  auto t = floor_transport();
  auto cfg = testing::fixture_provider_config();
  cfg.retry.attempts = 3;
  cfg.retry.initial_backoff = std::chrono::milliseconds(10);
  Provider p(cfg, t, CassetteMode::Live);
  std::vector<long long> sleeps;
  p.set_sleeper([&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); });

  t->fail_next(2, true);
  CHECK(p.complete("Describe the floor.") == "a wooden floor");
  CHECK(t->calls() == 3);
  CHECK(sleeps == std::vector<long long>{10, 20});

  t->fail_next(3, true);
  CHECK_THROWS_AS(p.complete("Describe the floor."), ProviderError);
  CHECK(t->calls() == 6);

  t->fail_next(1, false);
  CHECK_THROWS_AS(p.complete("Describe the floor."), ProviderError);
  CHECK(t->calls() == 7);
}

TEST_CASE("max_parallel bounds concurrent transport calls") {
  for (const int limit : {1, 2, 3}) {
    auto t = std::make_shared<testing::ScriptedTransport>();
    t->on([](const Request& r) { return std::optional<std::string>("ok " + r.prompt); });
    t->set_delay(std::chrono::milliseconds(15));
    auto cfg = testing::fixture_provider_config();
    cfg.max_parallel = limit;
    Provider p(cfg, t, CassetteMode::Live);
    const auto replies = parallel_map(12, 8, [&](std::size_t i) { return p.complete("q" + std::to_string(i)); });
    CHECK(replies[5] == "ok q5");
    CHECK(t->max_in_flight() <= limit);
    CHECK(t->max_in_flight() >= 1);
  }
}

TEST_CASE("request bodies and reply parsing") {
  auto cfg = testing::fixture_provider_config();
  Request r{"hi", {tiny_image(1)}};
  const auto openai = build_request_body(cfg, r);
  CHECK(openai["model"] == "scripted-vlm");
  CHECK(openai["messages"][0]["content"][1]["image_url"]["url"].get<std::string>().rfind("data:image/png;base64,", 0) == 0);
  CHECK(parse_reply_body(ApiStyle::OpenAiChat, R"({"choices":[{"message":{"content":"yes"}}]})") == "yes");

  cfg.api = ApiStyle::Gemini;
  const auto gemini = build_request_body(cfg, r);
  CHECK(gemini["contents"][0]["parts"][0]["text"] == "hi");
  CHECK(parse_reply_body(ApiStyle::Gemini, R"({"candidates":[{"content":{"parts":[{"text":"a "},{"text":"b"}]}}]})") == "a b");
  CHECK_THROWS_AS(parse_reply_body(ApiStyle::Gemini, "<html>"), TransportError);
  CHECK_THROWS_AS(parse_reply_body(ApiStyle::OpenAiChat, R"({"choices":[]})"), TransportError);
}

TEST_CASE("HTTP transport reads the key from the environment") {
  httplib::Server server;
  std::string seen_auth;
  int status = 200;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    res.status = status;
    res.set_content(R"({"choices":[{"message":{"content":"a wooden floor"}}]})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto cfg = testing::fixture_provider_config();
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.credential_env = "EDITAUDIT_TEST_PROVIDER_KEY";
  HttpTransport http;

  ::unsetenv("EDITAUDIT_TEST_PROVIDER_KEY");
  CHECK_THROWS_AS(http.send(cfg, {"Describe the floor.", {}}), TransportError);

  ::setenv("EDITAUDIT_TEST_PROVIDER_KEY", "test-key", 1);
  CHECK(http.send(cfg, {"Describe the floor.", {}}) == "a wooden floor");
  CHECK(seen_auth == "Bearer test-key");

  status = 503;
  try {
    http.send(cfg, {"Describe the floor.", {}});
    FAIL("expected an HTTP error");
  } catch (const TransportError& e) {
    CHECK(e.retryable());
  }
  status = 400;
  try {
    http.send(cfg, {"Describe the floor.", {}});
    FAIL("expected an HTTP error");
  } catch (const TransportError& e) {
    CHECK_FALSE(e.retryable());
  }
  ::unsetenv("EDITAUDIT_TEST_PROVIDER_KEY");
  server.stop();
  th.join();
}
