// SPDX-License-Identifier: Apache-2.0
#include "editaudit/providers/provider.hpp"

#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "editaudit/core/digest.hpp"
#include "editaudit/core/text.hpp"

namespace editaudit::providers {

namespace fs = std::filesystem;
using nlohmann::json;

void validate(const ProviderConfig& cfg) {
  if (cfg.provider_id.empty()) throw ProviderError("provider config: empty provider_id");
  if (cfg.model_name.empty()) throw ProviderError("provider config: empty model_name");
  if (cfg.max_parallel < 1)
    throw ProviderError("provider config '" + cfg.provider_id + "': max_parallel must be >= 1");
  if (cfg.retry.attempts < 1)
    throw ProviderError("provider config '" + cfg.provider_id + "': retry attempts must be >= 1");
  if (cfg.retry.multiplier < 1.0)
    throw ProviderError("provider config '" + cfg.provider_id + "': backoff multiplier < 1");
}

ProviderConfig config_from_json(const json& j) {
  ProviderConfig cfg;
  try {
    cfg.provider_id = j.at("provider_id").get<std::string>();
    cfg.model_name = j.at("model").get<std::string>();
    cfg.endpoint = j.value("endpoint", "");
    cfg.credential_env = j.value("credential_env", "");
    if (j.contains("credential")) {
      throw ProviderError("provider config '" + cfg.provider_id +
                          "': inline credentials are not accepted, use credential_env");
    }
    const auto api = j.value("api", std::string("openai"));
    if (api == "openai") cfg.api = ApiStyle::OpenAiChat;
    else if (api == "gemini") cfg.api = ApiStyle::Gemini;
    else throw ProviderError("provider config: unknown api '" + api + "'");
    cfg.max_parallel = j.value("max_parallel", 1);
    cfg.timeout = std::chrono::milliseconds(j.value("timeout_ms", 60000));
    if (j.contains("retry")) {
      const auto& r = j.at("retry");
      cfg.retry.attempts = r.value("attempts", cfg.retry.attempts);
      cfg.retry.initial_backoff = std::chrono::milliseconds(
          r.value("initial_backoff_ms", static_cast<int>(cfg.retry.initial_backoff.count())));
      cfg.retry.multiplier = r.value("multiplier", cfg.retry.multiplier);
    }
  } catch (const json::exception& e) {
    throw ProviderError(std::string("provider config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ProviderConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ProviderError("cannot read provider config " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ProviderError(path.string() + ": " + e.what());
  }
}

ImageInput make_image_input(const Image& image) {
  return ImageInput{encode_png(image), image_digest(image)};
}

void to_json(json& j, const Exchange& e) {
  j = json{{"request_digest", e.request_digest}, {"provider_id", e.provider_id},
           {"model_name", e.model_name},         {"prompt", e.prompt},
           {"image_digests", e.image_digests},   {"response_text", e.response_text},
           {"timestamp", e.timestamp}};
}

void from_json(const json& j, Exchange& e) {
  j.at("request_digest").get_to(e.request_digest);
  j.at("provider_id").get_to(e.provider_id);
  j.at("model_name").get_to(e.model_name);
  j.at("prompt").get_to(e.prompt);
  j.at("image_digests").get_to(e.image_digests);
  j.at("response_text").get_to(e.response_text);
  e.timestamp = j.value("timestamp", "");
}

std::string request_digest(std::string_view provider_id, std::string_view model_name,
                           std::string_view prompt, std::span<const std::string> image_digests) {
  json key = json::array({provider_id, model_name, prompt,
                          std::vector<std::string>(image_digests.begin(), image_digests.end())});
  return sha256_hex(key.dump());
}

CassetteStore::CassetteStore(fs::path dir) : dir_(std::move(dir)) {}

std::optional<Exchange> CassetteStore::load(const std::string& digest) const {
  const auto p = dir_ / (digest + ".json");
  std::ifstream in(p);
  if (!in) return std::nullopt;
  try {
    auto e = json::parse(in).get<Exchange>();
    if (e.request_digest != digest)
      throw ProviderError("cassette " + p.string() + " holds digest " + e.request_digest);
    return e;
  } catch (const json::exception& err) {
    throw ProviderError("corrupt cassette " + p.string() + ": " + err.what());
  }
}

void CassetteStore::save(const Exchange& exchange) {
  std::lock_guard lock(write_mutex_);
  fs::create_directories(dir_);
  const auto final_path = dir_ / (exchange.request_digest + ".json");
  const auto tmp = dir_ / (exchange.request_digest + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ProviderError("cannot write cassette " + tmp.string());
    out << json(exchange).dump(2) << '\n';
  }
  fs::rename(tmp, final_path);
}

CassetteMode parse_mode(std::string_view text) {
  const auto t = text::to_lower(text);
  if (t == "live") return CassetteMode::Live;
  if (t == "record") return CassetteMode::Record;
  if (t == "replay") return CassetteMode::Replay;
  throw ProviderError("unknown cassette mode '" + std::string(text) + "' (live|record|replay)");
}

std::string_view to_string(CassetteMode m) {
  switch (m) {
    case CassetteMode::Live: return "live";
    case CassetteMode::Record: return "record";
    case CassetteMode::Replay: return "replay";
  }
  return "?";
}

ParallelGate::ParallelGate(int limit) : limit_(limit) {
  if (limit < 1) throw ProviderError("parallel limit must be >= 1");
}

void ParallelGate::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return in_flight_ < limit_; });
  ++in_flight_;
}

void ParallelGate::release() {
  {
    std::lock_guard lock(mutex_);
    --in_flight_;
  }
  cv_.notify_one();
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct GateHold {
  explicit GateHold(ParallelGate& g) : gate(g) { gate.acquire(); }
  ~GateHold() { gate.release(); }
  ParallelGate& gate;
};

}  // namespace

Provider::Provider(ProviderConfig cfg, std::shared_ptr<Transport> transport, CassetteMode mode,
                   std::optional<fs::path> cassette_dir)
    : cfg_(std::move(cfg)),
      transport_(std::move(transport)),
      mode_(mode),
      gate_((validate(cfg_), cfg_.max_parallel)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (mode_ != CassetteMode::Live) {
    if (!cassette_dir)
      throw ProviderError(std::string(to_string(mode_)) + " mode requires a cassette directory");
    cassettes_ = std::make_unique<CassetteStore>(*cassette_dir);
  }
  if (mode_ != CassetteMode::Replay && !transport_)
    throw ProviderError(std::string(to_string(mode_)) + " mode requires a transport");
}

std::string Provider::call_with_retry(const Request& request) {
  auto backoff = cfg_.retry.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      GateHold hold(gate_);
      ++transport_calls_;
      return transport_->send(cfg_, request);
    } catch (const TransportError& e) {
      if (!e.retryable() || attempt >= cfg_.retry.attempts) {
        throw ProviderError(cfg_.provider_id + ": " + e.what() + " (after " +
                            std::to_string(attempt) + " attempt(s))");
      }
    }
    sleeper_(backoff);
    backoff = std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(backoff.count()) * cfg_.retry.multiplier));
  }
}

std::string Provider::complete(std::string_view prompt, std::span<const ImageInput> images) {
  if (text::trim(prompt).empty()) throw ProviderError("empty prompt");
  std::vector<std::string> digests;
  digests.reserve(images.size());
  for (const auto& img : images) digests.push_back(img.digest);
  const auto digest = request_digest(cfg_.provider_id, cfg_.model_name, prompt, digests);

  if (cassettes_) {
    if (auto hit = cassettes_->load(digest)) {
      ++cassette_hits_;
      return hit->response_text;
    }
    if (mode_ == CassetteMode::Replay) throw ReplayMissError(digest);
  }

  Request request{std::string(prompt), std::vector<ImageInput>(images.begin(), images.end())};
  std::string reply = call_with_retry(request);
  if (text::trim(reply).empty())
    throw ProviderError(cfg_.provider_id + ": empty response for request " + digest);

  if (mode_ == CassetteMode::Record) {
    cassettes_->save(Exchange{digest, cfg_.provider_id, cfg_.model_name, std::string(prompt),
                              digests, reply, utc_now()});
  }
  return reply;
}

std::string Provider::describe_image(const ImageInput& image, std::string_view prompt) {
  return complete(prompt, std::span<const ImageInput>(&image, 1));
}

}  // namespace editaudit::providers
