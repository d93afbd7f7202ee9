#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

#include <gtest/gtest.h>
#include <httplib.h>

#include "patchgate/errors.hpp"
#include "patchgate/http_provider.hpp"

using namespace patchgate;

namespace {

// Local chat-completions stand-in. `statuses` are served in order; the last
// one repeats.
class FakeServer {
 public:
  explicit FakeServer(std::vector<int> statuses) : statuses_(std::move(statuses)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const std::size_t i = hits_++;
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      const int status = statuses_[std::min(i, statuses_.size() - 1)];
      res.status = status;
      if (status == 200) {
        res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"```python\nx = 1\n```"}}]})",
                        "application/json");
      } else {
        res.set_content(R"({"error":"nope"})", "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  std::size_t hits() const { return hits_; }
  std::string last_auth_;
  std::string last_body_;

 private:
  httplib::Server server_;
  std::vector<int> statuses_;
  std::atomic<std::size_t> hits_{0};
  int port_ = 0;
  std::thread thread_;
};

ChatRequest sample_request() { return {"gpt-4", 0.5, "fix it"}; }

}  // namespace

TEST(HttpProvider, ReturnsMessageContent) {
  FakeServer server({200});
  HttpChatProvider provider(server.base_url(), "secret-key");
  EXPECT_EQ(provider.complete(sample_request()), "```python\nx = 1\n```");
  EXPECT_EQ(server.last_auth_, "Bearer secret-key");
  const auto body = Json::parse(server.last_body_);
  EXPECT_EQ(body, sample_request().body());
  EXPECT_EQ(body["messages"][0]["content"], "fix it");
}

TEST(HttpProvider, RetriesServerErrorsWithBackoff) {
  FakeServer server({500, 429, 200});
  std::vector<std::chrono::milliseconds> sleeps;
  HttpChatProvider provider(server.base_url(), "k", RetryPolicy{3, std::chrono::milliseconds(10)});
  provider.set_sleeper([&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  EXPECT_NO_THROW(provider.complete(sample_request()));
  EXPECT_EQ(server.hits(), 3u);
  ASSERT_EQ(sleeps.size(), 2u);
  EXPECT_EQ(sleeps[0].count(), 10);
  EXPECT_EQ(sleeps[1].count(), 20);
}

TEST(HttpProvider, GivesUpAfterAttempts) {
  FakeServer server({503});
  HttpChatProvider provider(server.base_url(), "k", RetryPolicy{2, std::chrono::milliseconds(1)});
  provider.set_sleeper([](std::chrono::milliseconds) {});
  EXPECT_THROW(provider.complete(sample_request()), ProviderError);
  EXPECT_EQ(server.hits(), 2u);
}

TEST(HttpProvider, ClientErrorsAreNotRetried) {
  FakeServer server({401});
  HttpChatProvider provider(server.base_url(), "k");
  provider.set_sleeper([](std::chrono::milliseconds) { FAIL() << "should not back off"; });
  EXPECT_THROW(provider.complete(sample_request()), ProviderError);
  EXPECT_EQ(server.hits(), 1u);
}

TEST(HttpProvider, TransportFailureIsProviderError) {
  HttpChatProvider provider("http://127.0.0.1:1", "k", RetryPolicy{2, std::chrono::milliseconds(1)});
  provider.set_sleeper([](std::chrono::milliseconds) {});
  provider.set_timeout(std::chrono::seconds(2));
  EXPECT_THROW(provider.complete(sample_request()), ProviderError);
}

TEST(HttpProvider, BaseUrlNeedsScheme) {
  EXPECT_THROW(HttpChatProvider("api.example.com", "k"), ConfigError);
}

TEST(HttpProvider, ApiKeyComesFromEnvironment) {
  ::unsetenv(kApiKeyEnv);
  EXPECT_THROW(HttpChatProvider::api_key_from_env(), ConfigError);
  ::setenv(kApiKeyEnv, "from-env", 1);
  EXPECT_EQ(HttpChatProvider::api_key_from_env(), "from-env");
  ::unsetenv(kApiKeyEnv);
}
