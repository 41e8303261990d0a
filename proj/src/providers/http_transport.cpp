// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>

#include <httplib.h>

#include "editaudit/core/digest.hpp"
#include "editaudit/providers/provider.hpp"

namespace editaudit::providers {

using nlohmann::json;

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ProviderError("endpoint is not a URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string read_credential(const ProviderConfig& cfg) {
  if (cfg.credential_env.empty()) return {};
  const char* v = std::getenv(cfg.credential_env.c_str());
  if (v == nullptr || *v == '\0')
    throw TransportError("environment variable " + cfg.credential_env + " is not set", false);
  return v;
}

}  // namespace

json build_request_body(const ProviderConfig& cfg, const Request& request) {
  if (cfg.api == ApiStyle::Gemini) {
    json parts = json::array({{{"text", request.prompt}}});
    for (const auto& img : request.images)
      parts.push_back({{"inline_data", {{"mime_type", "image/png"}, {"data", base64_encode(img.png)}}}});
    return {{"contents", json::array({{{"role", "user"}, {"parts", parts}}})},
            {"generationConfig", {{"temperature", 0}}}};
  }
  json content = json::array({{{"type", "text"}, {"text", request.prompt}}});
  for (const auto& img : request.images) {
    content.push_back({{"type", "image_url"},
                       {"image_url", {{"url", "data:image/png;base64," + base64_encode(img.png)}}}});
  }
  return {{"model", cfg.model_name},
          {"temperature", 0},
          {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
}

std::string parse_reply_body(ApiStyle api, std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw TransportError(std::string("reply is not JSON: ") + e.what(), false);
  }
  try {
    if (api == ApiStyle::Gemini) {
      std::string out;
      for (const auto& part : j.at("candidates").at(0).at("content").at("parts"))
        if (part.contains("text")) out += part.at("text").get<std::string>();
      return out;
    }
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    std::string out;
    for (const auto& part : content)
      if (part.value("type", "") == "text") out += part.at("text").get<std::string>();
    return out;
  } catch (const json::exception& e) {
    throw TransportError(std::string("unexpected reply shape: ") + e.what(), false);
  }
}

std::string HttpTransport::send(const ProviderConfig& cfg, const Request& request) {
  const std::string key = read_credential(cfg);
  std::string url = cfg.endpoint;
  httplib::Headers headers;
  if (cfg.api == ApiStyle::Gemini) {
    if (url.ends_with('/')) url.pop_back();
    url += "/models/" + cfg.model_name + ":generateContent";
    if (!key.empty()) headers.emplace("x-goog-api-key", key);
  } else if (!key.empty()) {
    headers.emplace("Authorization", "Bearer " + key);
  }
  const auto [origin, path] = split_url(url);
  httplib::Client client(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout).count();
  client.set_connection_timeout(static_cast<time_t>(secs));
  client.set_read_timeout(static_cast<time_t>(secs));
  client.set_write_timeout(static_cast<time_t>(secs));

  auto res = client.Post(path, headers, build_request_body(cfg, request).dump(), "application/json");
  if (!res) throw TransportError("HTTP error: " + httplib::to_string(res.error()), true);
  if (res->status == 429 || res->status >= 500)
    throw TransportError("HTTP " + std::to_string(res->status), true);
  if (res->status != 200)
    throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300), false);
  return parse_reply_body(cfg.api, res->body);
}

}  // namespace editaudit::providers
