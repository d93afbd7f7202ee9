#include "patchgate/corpus.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "patchgate/digest.hpp"
#include "patchgate/errors.hpp"
#include "patchgate/text.hpp"

namespace fs = std::filesystem;

namespace patchgate {

std::vector<Json> Problem::expected_values() const {
  std::vector<Json> out;
  out.reserve(test_cases.size());
  for (const auto& tc : test_cases) out.push_back(tc.expected);
  return out;
}

namespace {

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

[[noreturn]] void field_error(const std::string& origin, const std::string& field,
                              const std::string& what) {
  throw ParseError(fmt::format("{}: field '{}': {}", origin, field, what));
}

const char* language_for(const std::string& ext) {
  if (ext == "py") return "python";
  if (ext == "js") return "javascript";
  if (ext == "rb") return "ruby";
  return "unknown";
}

// Finds `<dir>/<stem>.<ext>`; exactly one match is required.
fs::path find_source(const fs::path& dir, const std::string& stem) {
  std::vector<fs::path> hits;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().stem() == stem && entry.path().has_extension()) {
      hits.push_back(entry.path());
    }
  }
  if (hits.empty()) {
    throw NotFoundError(fmt::format("{}: missing {}.<ext>", dir.string(), stem));
  }
  if (hits.size() > 1) {
    std::sort(hits.begin(), hits.end());
    throw ValidationError(fmt::format("{}: ambiguous {} sources ({} and {})", dir.string(), stem,
                                      hits[0].filename().string(), hits[1].filename().string()));
  }
  return hits.front();
}

}  // namespace

Json parse_manifest(const std::string& text, const std::string& origin) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(fmt::format("{}:{}: malformed JSON: {}", origin, line_of(text, e.byte), e.what()));
  }
  if (!doc.is_object()) throw ParseError(fmt::format("{}: manifest must be a JSON object", origin));
  for (const char* key : {"name", "entry_point"}) {
    if (!doc.contains(key)) field_error(origin, key, "missing");
    if (!doc[key].is_string() || doc[key].get_ref<const std::string&>().empty()) {
      field_error(origin, key, "must be a non-empty string");
    }
  }
  if (doc.contains("adapter") && !doc["adapter"].is_null() && !doc["adapter"].is_string()) {
    field_error(origin, "adapter", "must be a string or null");
  }
  if (!doc.contains("cases")) field_error(origin, "cases", "missing");
  if (!doc["cases"].is_array()) field_error(origin, "cases", "must be an array");
  const auto& cases = doc["cases"];
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const std::string where = fmt::format("cases[{}]", i);
    if (!c.is_object()) field_error(origin, where, "must be an object");
    if (!c.contains("input")) field_error(origin, where + ".input", "missing");
    if (!c["input"].is_array()) field_error(origin, where + ".input", "must be an array of arguments");
    if (!c.contains("expected")) field_error(origin, where + ".expected", "missing");
  }
  if (cases.empty()) throw ValidationError(fmt::format("{}: test suite is empty", origin));
  return doc;
}

Problem load_problem(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw NotFoundError(fmt::format("problem directory '{}' not found", dir.string()));
  const fs::path manifest_path = dir / kManifestFile;
  if (!fs::exists(manifest_path)) {
    throw NotFoundError(fmt::format("{}: missing {}", dir.string(), kManifestFile));
  }
  const fs::path buggy = find_source(dir, "buggy");
  const fs::path reference = find_source(dir, "reference");
  if (buggy.extension() != reference.extension()) {
    throw ValidationError(fmt::format("{}: buggy and reference sources use different extensions", dir.string()));
  }

  const Json doc = parse_manifest(read_file(manifest_path.string()), manifest_path.string());
  Problem p;
  p.name = doc["name"].get<std::string>();
  p.entry_point = doc["entry_point"].get<std::string>();
  if (doc.contains("adapter") && doc["adapter"].is_string()) p.adapter = doc["adapter"].get<std::string>();
  for (const auto& c : doc["cases"]) p.test_cases.push_back({c["input"], c["expected"]});
  p.buggy_source = normalize_newlines(read_file(buggy.string()));
  p.reference_source = normalize_newlines(read_file(reference.string()));
  p.source_extension = buggy.extension().string().substr(1);
  p.language_tag = language_for(p.source_extension);
  return p;
}

void write_problem(const Problem& problem, const fs::path& dir) {
  fs::create_directories(dir);
  const std::string ext = problem.source_extension.empty() ? "py" : problem.source_extension;
  write_file_atomic((dir / ("buggy." + ext)).string(), problem.buggy_source);
  write_file_atomic((dir / ("reference." + ext)).string(), problem.reference_source);
  Json doc{{"name", problem.name}, {"entry_point", problem.entry_point}};
  doc["adapter"] = problem.adapter ? Json(*problem.adapter) : Json(nullptr);
  doc["cases"] = Json::array();
  for (const auto& tc : problem.test_cases) {
    doc["cases"].push_back({{"input", tc.input}, {"expected", tc.expected}});
  }
  write_file_atomic((dir / kManifestFile).string(), doc.dump(2) + "\n");
}

std::vector<Problem> load_corpus(const fs::path& root,
                                 const std::optional<std::vector<std::string>>& filter) {
  if (!fs::is_directory(root)) throw NotFoundError(fmt::format("corpus root '{}' not found", root.string()));
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / kManifestFile)) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());

  std::vector<Problem> problems;
  std::set<std::string> seen;
  for (const auto& dir : dirs) {
    Problem p = load_problem(dir);
    if (!seen.insert(p.name).second) {
      throw ValidationError(fmt::format("duplicate problem name '{}' (second copy in {})", p.name, dir.string()));
    }
    problems.push_back(std::move(p));
  }

  if (filter) {
    std::set<std::string> wanted(filter->begin(), filter->end());
    for (const auto& name : wanted) {
      if (!seen.contains(name)) throw NotFoundError(fmt::format("problem '{}' is not in the corpus", name));
    }
    std::erase_if(problems, [&](const Problem& p) { return !wanted.contains(p.name); });
  }
  std::sort(problems.begin(), problems.end(),
            [](const Problem& a, const Problem& b) { return a.name < b.name; });
  if (problems.empty()) throw EmptyCorpusError(fmt::format("no problems found under '{}'", root.string()));
  return problems;
}

std::string corpus_digest(const std::vector<Problem>& problems) {
  Sha256Builder h;
  for (const auto& p : problems) {
    h.field(p.name).field(p.entry_point).field(p.adapter.value_or("")).field(p.language_tag);
    h.field(p.buggy_source).field(p.reference_source);
    for (const auto& tc : p.test_cases) h.field(tc.input.dump()).field(tc.expected.dump());
  }
  return h.hex();
}

}  // namespace patchgate
