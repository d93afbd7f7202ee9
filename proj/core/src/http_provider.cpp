#include "patchgate/http_provider.hpp"

#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "patchgate/errors.hpp"

namespace patchgate {

HttpChatProvider::HttpChatProvider(std::string base_url, std::string api_key, RetryPolicy retry)
    : api_key_(std::move(api_key)),
      retry_(retry),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (retry_.attempts < 1) throw ConfigError("retry attempts must be at least 1");
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError(fmt::format("base URL '{}' needs an http:// or https:// scheme", base_url));
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  scheme_host_port_ = base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpChatProvider::api_key_from_env() {
  const char* key = std::getenv(kApiKeyEnv);
  if (key == nullptr || *key == '\0') {
    throw ConfigError(fmt::format("{} must be set for live and record modes", kApiKeyEnv));
  }
  return key;
}

std::string HttpChatProvider::complete(const ChatRequest& request) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  const httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
  const std::string body = request.body().dump();
  const std::string path = path_prefix_ + "/chat/completions";

  std::string last_error;
  auto backoff = retry_.initial_backoff;
  for (int attempt = 1; attempt <= retry_.attempts; ++attempt) {
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = fmt::format("transport error: {}", httplib::to_string(res.error()));
    } else if (res->status == 429 || res->status >= 500) {
      last_error = fmt::format("HTTP {}", res->status);
    } else if (res->status != 200) {
      throw ProviderError(fmt::format("provider rejected request: HTTP {}: {}", res->status, res->body));
    } else {
      try {
        const auto doc = Json::parse(res->body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const Json::exception& e) {
        throw ProviderError(fmt::format("unexpected provider response: {}", e.what()));
      }
    }
    if (attempt < retry_.attempts) {
      sleeper_(backoff);
      backoff *= 2;
    }
  }
  throw ProviderError(fmt::format("provider failed after {} attempts: {}", retry_.attempts, last_error));
}

}  // namespace patchgate
