#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace patchgate {

struct CassetteEntry {
  std::string request_digest;
  std::string response_text;
  std::string recorded_at;  // RFC 3339 UTC

  friend bool operator==(const CassetteEntry&, const CassetteEntry&) = default;
};

/// Content hash identifying one sampled response.
std::string cassette_key(std::string_view model_id, double temperature, std::string_view prompt,
                         int trial_index);

/// Append-only store of provider responses, persisted as JSON Lines
/// (`{"key","request_digest","response_text","recorded_at"}` per line).
/// All members are safe to call concurrently.
class Cassette {
 public:
  using Clock = std::function<std::string()>;

  /// In-memory cassette; record() does not persist.
  Cassette();

  /// Loads `path` if it exists (ParseError on a malformed line, with its line
  /// number); later record() calls append to it.
  static Cassette open(const std::filesystem::path& path);

  /// Replay-only load; NotFoundError if the file is missing.
  static Cassette load(const std::filesystem::path& path);

  Cassette(Cassette&& other) noexcept;
  Cassette& operator=(Cassette&& other) noexcept;

  std::optional<CassetteEntry> find(const std::string& key) const;

  /// Stores a response. Re-recording the same text under a key is a no-op;
  /// a different text under an existing key throws CassetteConflictError.
  void record(const std::string& key, std::string request_digest, std::string response_text);

  std::size_t size() const;
  std::map<std::string, CassetteEntry> entries() const;

  /// Replaces the timestamp source (fixtures use a constant).
  void set_clock(Clock clock);

  static std::string utc_now();

 private:
  mutable std::mutex mutex_;
  std::map<std::string, CassetteEntry> entries_;
  std::optional<std::filesystem::path> path_;
  Clock clock_;
};

}  // namespace patchgate
