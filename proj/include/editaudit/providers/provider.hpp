// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "editaudit/core/error.hpp"
#include "editaudit/core/image.hpp"

namespace editaudit::providers {

class ProviderError : public Error {
 public:
  using Error::Error;
};

/// Raised by transports. Only retryable errors are retried.
class TransportError : public ProviderError {
 public:
  TransportError(const std::string& what, bool retryable)
      : ProviderError(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

class ReplayMissError : public ProviderError {
 public:
  explicit ReplayMissError(std::string digest)
      : ProviderError("replay miss: no cassette for request " + digest), digest_(std::move(digest)) {}
  const std::string& digest() const { return digest_; }

 private:
  std::string digest_;
};

struct RetryPolicy {
  int attempts = 3;  // total tries, including the first
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
};

/// Wire format spoken by HttpTransport.
enum class ApiStyle { OpenAiChat, Gemini };

struct ProviderConfig {
  std::string provider_id;
  std::string endpoint;  // full URL of the completion route (Gemini: base URL)
  std::string model_name;
  std::string credential_env;  // name of the environment variable holding the key
  ApiStyle api = ApiStyle::OpenAiChat;
  int max_parallel = 1;
  std::chrono::milliseconds timeout{60000};
  RetryPolicy retry;
};

/// Throws ProviderError on max_parallel < 1, empty ids, or bad retry values.
void validate(const ProviderConfig& cfg);
ProviderConfig config_from_json(const nlohmann::json& j);
ProviderConfig load_config(const std::filesystem::path& path);

/// An image attached to a request: PNG bytes plus the pixel digest used for
/// request addressing.
struct ImageInput {
  std::vector<std::uint8_t> png;
  std::string digest;
};
ImageInput make_image_input(const Image& image);

struct Request {
  std::string prompt;
  std::vector<ImageInput> images;
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// Returns the model's text. Throws TransportError.
  virtual std::string send(const ProviderConfig& cfg, const Request& request) = 0;
};

/// HTTP(S) transport. The key is read from cfg.credential_env at call time.
class HttpTransport : public Transport {
 public:
  std::string send(const ProviderConfig& cfg, const Request& request) override;
};

/// Bodies and reply parsing for each API style, exposed for tests.
nlohmann::json build_request_body(const ProviderConfig& cfg, const Request& request);
std::string parse_reply_body(ApiStyle api, std::string_view body);

struct Exchange {
  std::string request_digest;
  std::string provider_id;
  std::string model_name;
  std::string prompt;
  std::vector<std::string> image_digests;
  std::string response_text;
  std::string timestamp;
};
void to_json(nlohmann::json& j, const Exchange& e);
void from_json(const nlohmann::json& j, Exchange& e);

/// sha256 over the canonical JSON array [provider_id, model, prompt, digests].
std::string request_digest(std::string_view provider_id, std::string_view model_name,
                           std::string_view prompt, std::span<const std::string> image_digests);

/// One JSON file per exchange, named <request_digest>.json.
class CassetteStore {
 public:
  explicit CassetteStore(std::filesystem::path dir);
  std::optional<Exchange> load(const std::string& digest) const;
  void save(const Exchange& exchange);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::mutex write_mutex_;
};

enum class CassetteMode { Live, Record, Replay };
CassetteMode parse_mode(std::string_view text);
std::string_view to_string(CassetteMode m);

/// Counting gate bounding in-flight calls.
class ParallelGate {
 public:
  explicit ParallelGate(int limit);
  void acquire();
  void release();
  int limit() const { return limit_; }

 private:
  int limit_;
  int in_flight_ = 0;
  std::mutex mutex_;
  std::condition_variable cv_;
};

/// A configured model endpoint with record/replay. Thread-safe.
///
/// Live: always calls the transport. Record: serves cassette hits and stores
/// every miss. Replay: cassette only, a miss raises ReplayMissError.
class Provider {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  Provider(ProviderConfig cfg, std::shared_ptr<Transport> transport, CassetteMode mode,
           std::optional<std::filesystem::path> cassette_dir = std::nullopt);

  /// Throws ProviderError for an empty prompt or an empty reply.
  std::string complete(std::string_view prompt, std::span<const ImageInput> images = {});
  std::string describe_image(const ImageInput& image, std::string_view prompt);

  const ProviderConfig& config() const { return cfg_; }
  CassetteMode mode() const { return mode_; }
  std::size_t transport_calls() const { return transport_calls_; }
  std::size_t cassette_hits() const { return cassette_hits_; }
  /// Replaces the backoff sleep (tests use a no-op).
  void set_sleeper(Sleeper s) { sleeper_ = std::move(s); }

 private:
  std::string call_with_retry(const Request& request);

  ProviderConfig cfg_;
  std::shared_ptr<Transport> transport_;
  CassetteMode mode_;
  std::unique_ptr<CassetteStore> cassettes_;
  ParallelGate gate_;
  Sleeper sleeper_;
  std::atomic<std::size_t> transport_calls_{0};
  std::atomic<std::size_t> cassette_hits_{0};
};

}  // namespace editaudit::providers
