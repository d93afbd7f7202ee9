#include "patchgate/cassette.hpp"

#include <ctime>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "patchgate/digest.hpp"
#include "patchgate/errors.hpp"
#include "patchgate/text.hpp"

namespace patchgate {

using Json = nlohmann::json;

std::string cassette_key(std::string_view model_id, double temperature, std::string_view prompt,
                         int trial_index) {
  const Json doc{{"model", model_id},
                 {"prompt", prompt},
                 {"temperature", temperature},
                 {"trial_index", trial_index}};
  return sha256_hex(doc.dump());
}

Cassette::Cassette() : clock_(&Cassette::utc_now) {}

Cassette::Cassette(Cassette&& other) noexcept {
  std::lock_guard lock(other.mutex_);
  entries_ = std::move(other.entries_);
  path_ = std::move(other.path_);
  clock_ = std::move(other.clock_);
}

Cassette& Cassette::operator=(Cassette&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mutex_, other.mutex_);
    entries_ = std::move(other.entries_);
    path_ = std::move(other.path_);
    clock_ = std::move(other.clock_);
  }
  return *this;
}

std::string Cassette::utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Cassette Cassette::open(const std::filesystem::path& path) {
  Cassette c;
  c.path_ = path;
  if (!std::filesystem::exists(path)) return c;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError(fmt::format("cannot read cassette '{}'", path.string()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      CassetteEntry e{j.at("request_digest").get<std::string>(), j.at("response_text").get<std::string>(),
                      j.at("recorded_at").get<std::string>()};
      const auto key = j.at("key").get<std::string>();
      const auto [it, inserted] = c.entries_.emplace(key, e);
      if (!inserted && it->second.response_text != e.response_text) {
        throw CassetteConflictError(
            fmt::format("{}:{}: key {} recorded twice with different responses", path.string(), line_no, key));
      }
    } catch (const Json::exception& e) {
      throw ParseError(fmt::format("{}:{}: malformed cassette entry: {}", path.string(), line_no, e.what()));
    }
  }
  return c;
}

Cassette Cassette::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw NotFoundError(fmt::format("cassette '{}' not found", path.string()));
  }
  return open(path);
}

std::optional<CassetteEntry> Cassette::find(const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void Cassette::record(const std::string& key, std::string request_digest, std::string response_text) {
  std::lock_guard lock(mutex_);
  if (const auto it = entries_.find(key); it != entries_.end()) {
    if (it->second.response_text == response_text) return;
    throw CassetteConflictError(fmt::format("cassette key {} already holds a different response", key));
  }
  CassetteEntry entry{std::move(request_digest), std::move(response_text), clock_()};
  if (path_) {
    const Json line{{"key", key},
                    {"request_digest", entry.request_digest},
                    {"response_text", entry.response_text},
                    {"recorded_at", entry.recorded_at}};
    std::ofstream out(*path_, std::ios::binary | std::ios::app);
    if (!out) throw IOError(fmt::format("cannot append to cassette '{}'", path_->string()));
    out << line.dump() << '\n';
    if (!out.flush()) throw IOError(fmt::format("cannot append to cassette '{}'", path_->string()));
  }
  entries_.emplace(key, std::move(entry));
}

std::size_t Cassette::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::map<std::string, CassetteEntry> Cassette::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

void Cassette::set_clock(Clock clock) {
  std::lock_guard lock(mutex_);
  clock_ = std::move(clock);
}

}  // namespace patchgate
