#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "patchgate/cassette.hpp"
#include "patchgate/corpus.hpp"

namespace patchgate {

inline constexpr std::string_view kCodePlaceholder = "<code>";

/// Prompt used when no template is configured. The buggy program replaces
/// the placeholder inside a python fence.
inline constexpr std::string_view kDefaultPromptTemplate =
    "The following code contains an error. Please fix the error and provide "
    "the correct working version:\n\n```python\n<code>\n```\n";

inline constexpr std::string_view kDefaultModelId = "gpt-4";

struct SamplingPlan {
  std::vector<double> temperatures{0.0, 0.5, 1.0};
  int trials_per_temperature = 3;
  std::string prompt_template{kDefaultPromptTemplate};
  std::string model_id{kDefaultModelId};

  /// Throws ConfigError when a temperature is non-finite or outside [0,2],
  /// the list is empty, or trials < 1.
  void validate() const;
};

Json to_json(const SamplingPlan& plan);

struct CandidateRef {
  std::string problem;
  double temperature = 0.0;
  int trial_index = 0;

  friend auto operator<=>(const CandidateRef&, const CandidateRef&) = default;
};

std::string to_string(const CandidateRef& ref);
Json to_json(const CandidateRef& ref);
CandidateRef candidate_ref_from_json(const Json& j);

struct PatchCandidate {
  std::string problem_name;
  double temperature = 0.0;
  int trial_index = 0;
  std::string raw_response;
  std::string extracted_code;
  std::string cassette_key;

  CandidateRef ref() const { return {problem_name, temperature, trial_index}; }

  friend bool operator==(const PatchCandidate&, const PatchCandidate&) = default;
};

Json to_json(const PatchCandidate& candidate);
PatchCandidate patch_candidate_from_json(const Json& j);

/// Replaces the single `<code>` placeholder with the problem's buggy source.
/// Throws TemplateError on zero or several placeholders.
std::string render_prompt(std::string_view prompt_template, const Problem& problem);

/// Isolates program text from a chat response: the last fenced block if any
/// fence exists, otherwise the response minus leading/trailing prose lines.
/// Output is newline-normalized with trailing whitespace trimmed per line.
std::string extract_code(std::string_view raw_response);

struct ChatRequest {
  std::string model;
  double temperature = 0.0;
  std::string prompt;

  /// Canonical JSON body {model, temperature, messages:[{role, content}]}.
  Json body() const;
};

/// A chat-completion backend.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

enum class SamplingMode { kLive, kRecord, kReplay };

std::string_view to_string(SamplingMode mode) noexcept;
SamplingMode sampling_mode_from_string(std::string_view text);

/// Where responses come from. Replay needs only the cassette; live needs
/// only the provider; record needs both.
struct ResponseSource {
  SamplingMode mode = SamplingMode::kReplay;
  ChatProvider* provider = nullptr;
  Cassette* cassette = nullptr;
};

/// Draws |temperatures| x trials candidates ordered by (temperature, trial).
/// Replay never touches the provider; a missing key raises CassetteMissError.
std::vector<PatchCandidate> sample_patches(const Problem& problem, const SamplingPlan& plan,
                                           const ResponseSource& source);

}  // namespace patchgate
