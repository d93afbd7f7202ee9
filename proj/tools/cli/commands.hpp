#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "patchgate/gate.hpp"
#include "patchgate/generation.hpp"
#include "patchgate/metrics.hpp"
#include "patchgate/oracle.hpp"

namespace patchgate::cli {

namespace fs = std::filesystem;

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitReject = 1;  // gate Reject, validate found an invalid problem
inline constexpr int kExitInfra = 2;

struct RunConfig {
  fs::path corpus_root;
  std::vector<double> temperatures{0.0, 0.5, 1.0};
  int trials = 3;
  SamplingMode mode = SamplingMode::kReplay;
  fs::path cassette_path;
  fs::path out_dir;
  std::optional<std::vector<std::string>> problems;
  unsigned workers = 1;
  int timeout_ms = 5000;
  double low_threshold = metrics::kDefaultLowThreshold;
  double oer_threshold = gate::kDefaultOerThreshold;
  double tau = gate::kDefaultTau;
  gate::SelectionPolicy policy = gate::SelectionPolicy::kMajority;

  std::string model_id{kDefaultModelId};
  std::string prompt_template{kDefaultPromptTemplate};
  std::string base_url = "https://api.openai.com/v1";
  ShimConfig shim;

  // Test seams. When null, a ShimExecutor / HttpChatProvider is built from
  // the fields above.
  ProgramExecutor* executor = nullptr;
  ChatProvider* provider = nullptr;

  /// ConfigError on out-of-range values or a mode/credential mismatch.
  void validate() const;
  SamplingPlan plan() const;
  RunLimits limits() const;
};

struct GateConfig {
  fs::path results_dir;
  double oer_threshold = gate::kDefaultOerThreshold;
  double tau = gate::kDefaultTau;
  gate::SelectionPolicy policy = gate::SelectionPolicy::kMajority;
  std::optional<std::vector<std::string>> problems;
};

struct ValidateConfig {
  fs::path corpus_root;
  std::optional<std::vector<std::string>> problems;
  int timeout_ms = 5000;
  ShimConfig shim;
  std::optional<fs::path> report_path;  // machine-readable copy of the results
  ProgramExecutor* executor = nullptr;
};

struct ReportConfig {
  fs::path results_dir;
  std::string format = "csv";
  bool svg = false;
};

// Each command catches library errors, writes a diagnostic to `err` and
// returns kExitInfra; nothing escapes except std::bad_alloc.
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_gate(const GateConfig& config, std::ostream& out, std::ostream& err);
int cmd_validate(const ValidateConfig& config, std::ostream& out, std::ostream& err);
int cmd_report(const ReportConfig& config, std::ostream& out, std::ostream& err);

/// Relative artifact path for one candidate, e.g. "kth/T0.5_trial2".
std::string artifact_stem(const CandidateRef& ref);

/// Parses "0,0.5,1" into temperatures; ConfigError on junk.
std::vector<double> parse_temperature_list(const std::string& text);
std::vector<std::string> parse_name_list(const std::string& text);

}  // namespace patchgate::cli
