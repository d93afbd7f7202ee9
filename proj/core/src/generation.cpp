#include "patchgate/generation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "patchgate/digest.hpp"
#include "patchgate/errors.hpp"
#include "patchgate/text.hpp"

namespace patchgate {

void SamplingPlan::validate() const {
  if (temperatures.empty()) throw ConfigError("sampling plan needs at least one temperature");
  std::set<double> seen;
  for (double t : temperatures) {
    if (!std::isfinite(t) || t < 0.0 || t > 2.0) {
      throw ConfigError(fmt::format("temperature {} is outside [0, 2]", t));
    }
    if (!seen.insert(t).second) throw ConfigError(fmt::format("temperature {} listed twice", t));
  }
  if (trials_per_temperature < 1) throw ConfigError("trials per temperature must be at least 1");
  if (model_id.empty()) throw ConfigError("model id must not be empty");
}

Json to_json(const SamplingPlan& plan) {
  std::vector<double> temps = plan.temperatures;
  std::sort(temps.begin(), temps.end());
  return {{"temperatures", temps},
          {"trials_per_temperature", plan.trials_per_temperature},
          {"prompt_template", plan.prompt_template},
          {"model_id", plan.model_id}};
}

std::string to_string(const CandidateRef& ref) {
  return fmt::format("{}@T{}#{}", ref.problem, temperature_label(ref.temperature), ref.trial_index);
}

Json to_json(const CandidateRef& ref) {
  return {{"problem", ref.problem}, {"temperature", ref.temperature}, {"trial_index", ref.trial_index}};
}

CandidateRef candidate_ref_from_json(const Json& j) {
  return {j.at("problem").get<std::string>(), j.at("temperature").get<double>(),
          j.at("trial_index").get<int>()};
}

Json to_json(const PatchCandidate& c) {
  return {{"problem", c.problem_name},     {"temperature", c.temperature},
          {"trial_index", c.trial_index},  {"raw_response", c.raw_response},
          {"extracted_code", c.extracted_code}, {"cassette_key", c.cassette_key}};
}

PatchCandidate patch_candidate_from_json(const Json& j) {
  PatchCandidate c;
  c.problem_name = j.at("problem").get<std::string>();
  c.temperature = j.at("temperature").get<double>();
  c.trial_index = j.at("trial_index").get<int>();
  c.raw_response = j.at("raw_response").get<std::string>();
  c.extracted_code = j.at("extracted_code").get<std::string>();
  c.cassette_key = j.at("cassette_key").get<std::string>();
  return c;
}

std::string render_prompt(std::string_view prompt_template, const Problem& problem) {
  const auto first = prompt_template.find(kCodePlaceholder);
  if (first == std::string_view::npos) {
    throw TemplateError("prompt template has no <code> placeholder");
  }
  if (prompt_template.find(kCodePlaceholder, first + kCodePlaceholder.size()) != std::string_view::npos) {
    throw TemplateError("prompt template has more than one <code> placeholder");
  }
  std::string out;
  out.reserve(prompt_template.size() + problem.buggy_source.size());
  out.append(prompt_template.substr(0, first));
  out.append(problem.buggy_source);
  out.append(prompt_template.substr(first + kCodePlaceholder.size()));
  return out;
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (true) {
    const auto pos = text.find('\n');
    lines.push_back(text.substr(0, pos));
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return lines;
}

bool is_fence(std::string_view line) {
  const auto start = line.find_first_not_of(" \t");
  return start != std::string_view::npos && line.substr(start).starts_with("```");
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

constexpr std::array<std::string_view, 24> kCodeStarters = {
    "import", "from", "def", "class", "return", "if", "elif", "else", "for", "while",
    "with", "try", "except", "finally", "pass", "raise", "yield", "print", "assert", "global",
    "nonlocal", "lambda", "async", "await"};

// Unindented, sentence-shaped text with no code punctuation.
bool looks_like_prose(std::string_view line) {
  if (line.empty() || line.front() == ' ' || line.front() == '\t') return false;
  if (line.back() == ':') return false;
  if (!std::isalpha(static_cast<unsigned char>(line.front()))) return false;
  constexpr std::string_view kOperators = "=()[]{}<>+*/%#@|&^~\\`\";";
  if (line.find_first_of(kOperators) != std::string_view::npos) return false;
  const auto first_word = line.substr(0, line.find(' '));
  if (std::find(kCodeStarters.begin(), kCodeStarters.end(), first_word) != kCodeStarters.end()) return false;
  return line.find(' ') != std::string_view::npos;
}

std::string strip_prose_edges(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t first = 0;
  std::size_t last = lines.size();
  while (first < last && (is_blank(lines[first]) || looks_like_prose(lines[first]))) ++first;
  while (last > first && (is_blank(lines[last - 1]) || looks_like_prose(lines[last - 1]))) --last;
  std::string out;
  for (std::size_t i = first; i < last; ++i) {
    if (i != first) out.push_back('\n');
    out.append(lines[i]);
  }
  return out;
}

}  // namespace

std::string extract_code(std::string_view raw_response) {
  const std::string text = normalize_code(raw_response);
  const auto lines = split_lines(text);

  std::optional<std::pair<std::size_t, std::size_t>> last_block;  // [begin, end) line range
  std::optional<std::size_t> open;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_fence(lines[i])) continue;
    if (open) {
      last_block = std::pair{*open + 1, i};
      open.reset();
    } else {
      open = i;
    }
  }
  if (open) last_block = std::pair{*open + 1, lines.size()};  // unterminated final fence

  // Prose stripping never empties a non-blank text: if every line reads as
  // prose, the text is kept as-is.
  const auto pick = [](std::string_view t) {
    std::string stripped = normalize_code(strip_prose_edges(t));
    return stripped.empty() ? normalize_code(t) : stripped;
  };
  if (!last_block) return pick(text);

  std::string body;
  for (std::size_t i = last_block->first; i < last_block->second; ++i) {
    if (i != last_block->first) body.push_back('\n');
    body.append(lines[i]);
  }
  if (std::string code = pick(body); !code.empty()) return code;

  // Empty final block: fall back to whatever lies outside the fences.
  std::string outside;
  for (const auto line : lines) {
    if (is_fence(line)) continue;
    outside.append(line);
    outside.push_back('\n');
  }
  if (std::string code = pick(outside); !code.empty()) return code;
  return text;
}

Json ChatRequest::body() const {
  return {{"model", model},
          {"temperature", temperature},
          {"messages", Json::array({{{"role", "user"}, {"content", prompt}}})}};
}

std::string_view to_string(SamplingMode mode) noexcept {
  switch (mode) {
    case SamplingMode::kLive: return "live";
    case SamplingMode::kRecord: return "record";
    case SamplingMode::kReplay: return "replay";
  }
  return "replay";
}

SamplingMode sampling_mode_from_string(std::string_view text) {
  if (text == "live") return SamplingMode::kLive;
  if (text == "record") return SamplingMode::kRecord;
  if (text == "replay") return SamplingMode::kReplay;
  throw ConfigError(fmt::format("unknown sampling mode '{}' (expected live, record or replay)", text));
}

std::vector<PatchCandidate> sample_patches(const Problem& problem, const SamplingPlan& plan,
                                           const ResponseSource& source) {
  plan.validate();
  const bool needs_cassette = source.mode != SamplingMode::kLive;
  const bool needs_provider = source.mode != SamplingMode::kReplay;
  if (needs_cassette && source.cassette == nullptr) {
    throw ConfigError(fmt::format("{} mode needs a cassette", to_string(source.mode)));
  }
  if (needs_provider && source.provider == nullptr) {
    throw ConfigError(fmt::format("{} mode needs a provider", to_string(source.mode)));
  }

  std::vector<double> temps = plan.temperatures;
  std::sort(temps.begin(), temps.end());
  const std::string prompt = render_prompt(plan.prompt_template, problem);

  std::vector<PatchCandidate> out;
  out.reserve(temps.size() * static_cast<std::size_t>(plan.trials_per_temperature));
  for (double t : temps) {
    for (int trial = 0; trial < plan.trials_per_temperature; ++trial) {
      PatchCandidate c;
      c.problem_name = problem.name;
      c.temperature = t;
      c.trial_index = trial;
      c.cassette_key = cassette_key(plan.model_id, t, prompt, trial);
      const ChatRequest request{plan.model_id, t, prompt};

      if (source.mode == SamplingMode::kReplay) {
        auto entry = source.cassette->find(c.cassette_key);
        if (!entry) throw CassetteMissError(c.cassette_key, problem.name, t, trial);
        c.raw_response = std::move(entry->response_text);
      } else if (source.mode == SamplingMode::kRecord) {
        if (auto entry = source.cassette->find(c.cassette_key)) {
          c.raw_response = std::move(entry->response_text);
        } else {
          c.raw_response = source.provider->complete(request);
          source.cassette->record(c.cassette_key, sha256_hex(request.body().dump()), c.raw_response);
        }
      } else {
        c.raw_response = source.provider->complete(request);
      }
      c.extracted_code = extract_code(c.raw_response);
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace patchgate
