#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "patchgate/outcome.hpp"

namespace patchgate {

struct TestCase {
  Json input;     // positional argument list (always an array)
  Json expected;  // canonical expected return value

  friend bool operator==(const TestCase&, const TestCase&) = default;
};

/// One corpus entry: a buggy program, its fixed counterpart and the oracle
/// suite that tells them apart. Immutable once loaded.
struct Problem {
  std::string name;
  std::string buggy_source;
  std::string reference_source;
  std::string entry_point;
  std::optional<std::string> adapter;  // shim-side argument builder
  std::vector<TestCase> test_cases;
  std::string language_tag;  // e.g. "python"
  std::string source_extension;  // e.g. "py"

  std::vector<Json> expected_values() const;

  friend bool operator==(const Problem&, const Problem&) = default;
};

inline constexpr const char* kManifestFile = "testcases.json";

/// Parses a testcases.json document. `origin` is used in error messages.
/// Throws ParseError (with field context) or ValidationError (empty suite).
Json parse_manifest(const std::string& text, const std::string& origin);

/// Loads `<dir>/buggy.<ext>`, `<dir>/reference.<ext>` and `<dir>/testcases.json`.
Problem load_problem(const std::filesystem::path& dir);

/// Writes a problem back in the on-disk layout. load_problem(write_problem(p)) == p.
void write_problem(const Problem& problem, const std::filesystem::path& dir);

/// Loads every problem directory under `root`, sorted by name. With a filter,
/// only the named problems are returned; an unknown name is a NotFoundError.
std::vector<Problem> load_corpus(const std::filesystem::path& root,
                                 const std::optional<std::vector<std::string>>& filter = std::nullopt);

/// SHA-256 over all problem fields, in corpus order.
std::string corpus_digest(const std::vector<Problem>& problems);

}  // namespace patchgate
