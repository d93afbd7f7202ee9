#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace patchgate {

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Incremental SHA-256 for digesting several fields without concatenating.
/// Each update is length-prefixed so ("ab","c") and ("a","bc") differ.
class Sha256Builder {
 public:
  Sha256Builder();
  ~Sha256Builder();
  Sha256Builder(const Sha256Builder&) = delete;
  Sha256Builder& operator=(const Sha256Builder&) = delete;

  Sha256Builder& field(std::string_view data);
  std::string hex();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace patchgate
