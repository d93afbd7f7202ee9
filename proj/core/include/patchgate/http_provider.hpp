#pragma once

#include <chrono>
#include <functional>
#include <string>

#include "patchgate/generation.hpp"

namespace patchgate {

inline constexpr const char* kApiKeyEnv = "PATCHGATE_API_KEY";

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};  // doubled after each failure
};

/// OpenAI-compatible chat-completions client. POSTs the request body to
/// `<base_url>/chat/completions` and returns choices[0].message.content.
/// Transport failures, HTTP 429 and 5xx are retried with exponential backoff;
/// anything else, or exhausting the attempts, throws ProviderError.
class HttpChatProvider : public ChatProvider {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  HttpChatProvider(std::string base_url, std::string api_key, RetryPolicy retry = {});

  std::string complete(const ChatRequest& request) override;

  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }
  void set_timeout(std::chrono::seconds timeout) { timeout_ = timeout; }

  /// Reads PATCHGATE_API_KEY; ConfigError if unset or empty.
  static std::string api_key_from_env();

 private:
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::string api_key_;
  RetryPolicy retry_;
  Sleeper sleeper_;
  std::chrono::seconds timeout_{120};
};

}  // namespace patchgate
