#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patchgate/corpus.hpp"
#include "patchgate/generation.hpp"
#include "patchgate/outcome.hpp"

namespace patchgate {

struct RunLimits {
  std::chrono::milliseconds timeout{5000};  // per case
  std::size_t max_output_bytes = 1 << 20;   // per result line
};

struct ProgramJob {
  std::string source;
  std::string entry_point;
  std::optional<std::string> adapter;
  std::span<const TestCase> cases;

  /// The job document written to the shim's stdin.
  Json to_wire() const;
};

struct ProgramRun {
  OutcomeVector outcomes;
  std::vector<std::int64_t> wall_time_ms;
};

/// Runs a program against a suite. Implementations must be safe to call from
/// several threads at once.
class ProgramExecutor {
 public:
  virtual ~ProgramExecutor() = default;
  virtual ProgramRun run(const ProgramJob& job, const RunLimits& limits) = 0;
};

struct ShimConfig {
  std::string interpreter = "python3";
  std::string shim_path;  // empty: default_shim_path()
};

/// $PATCHGATE_SHIM, else the installed shim, else the one in the source tree.
std::string default_shim_path();

/// Drives one shim subprocess per job over the line protocol. A case that
/// exceeds the timeout becomes Timeout; the process is killed and a fresh
/// one picks up the remaining cases. A result line longer than
/// max_output_bytes, or the interpreter dying mid-case, becomes RuntimeError
/// for that case. Malformed shim output throws ProtocolError; an
/// unlaunchable shim throws ExecutionEnvironmentError.
ProgramRun run_program(const ShimConfig& shim, const ProgramJob& job, const RunLimits& limits);

class ShimExecutor : public ProgramExecutor {
 public:
  explicit ShimExecutor(ShimConfig config = {});
  ProgramRun run(const ProgramJob& job, const RunLimits& limits) override;
  const ShimConfig& config() const { return config_; }

 private:
  ShimConfig config_;
};

/// Test double that replays previously observed outcomes keyed by the exact
/// program text and case input, so jobs over any slice of a recorded suite
/// resolve. Unknown programs or inputs throw ExecutionEnvironmentError.
class RecordedExecutor : public ProgramExecutor {
 public:
  void add(const std::string& source, std::span<const TestCase> cases, const OutcomeVector& outcomes);
  ProgramRun run(const ProgramJob& job, const RunLimits& limits) override;
  std::size_t calls() const;

 private:
  std::map<std::string, std::map<std::string, CaseOutcome>> recorded_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

/// Every outcome is a Value that compares equal to its expected value.
bool passes_all(const OutcomeVector& outcomes, const std::vector<TestCase>& cases);

struct TrialResult {
  CandidateRef candidate;
  OutcomeVector outcomes;
  bool pass_all = false;
  bool no_code = false;  // response had no extractable code
  std::vector<std::int64_t> wall_time_ms;
};

Json to_json(const TrialResult& result);
TrialResult trial_result_from_json(const Json& j);

/// Empty extracted code short-circuits to an all-LoadError trial.
TrialResult evaluate_trial(const PatchCandidate& candidate, const Problem& problem,
                           ProgramExecutor& executor, const RunLimits& limits);

/// Evaluates candidates on up to `workers` threads; results come back in the
/// order of `candidates`. The first infrastructure error is rethrown.
std::vector<TrialResult> evaluate_trials(std::span<const PatchCandidate> candidates,
                                         const std::vector<Problem>& problems,
                                         ProgramExecutor& executor, const RunLimits& limits,
                                         unsigned workers);

struct ValidationReport {
  std::string problem;
  bool valid = false;
  std::vector<std::size_t> failing_cases;  // 0-based indices where the reference fails
  double reference_oer = 0.0;              // reference outcomes vs expected values
  bool bug_checked = false;
  bool bug_detected = false;
  std::optional<std::size_t> bug_case;  // first case the buggy program fails
  std::vector<std::string> warnings;
};

/// Runs the reference on the full suite and, when `check_bug` is set, the
/// buggy program case by case until its first failure.
ValidationReport validate_problem(const Problem& problem, ProgramExecutor& executor,
                                  const RunLimits& limits, bool check_bug = true);

}  // namespace patchgate
