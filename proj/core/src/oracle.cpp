#include "patchgate/oracle.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <thread>

#include <fmt/format.h>

#include "patchgate/errors.hpp"
#include "patchgate/metrics.hpp"
#include "patchgate/subprocess.hpp"

namespace patchgate {

Json ProgramJob::to_wire() const {
  Json cases_json = Json::array();
  for (const auto& tc : cases) cases_json.push_back({{"input", tc.input}, {"expected", tc.expected}});
  return {{"source", source},
          {"entry_point", entry_point},
          {"adapter", adapter ? Json(*adapter) : Json(nullptr)},
          {"cases", std::move(cases_json)}};
}

std::string default_shim_path() {
  if (const char* env = std::getenv("PATCHGATE_SHIM"); env != nullptr && *env != '\0') return env;
  if (std::filesystem::exists(PATCHGATE_INSTALLED_SHIM)) return PATCHGATE_INSTALLED_SHIM;
  return PATCHGATE_SOURCE_SHIM;
}

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ms(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - since).count();
}

CaseOutcome parse_result_line(const std::string& line, std::size_t expected_case) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw ProtocolError(fmt::format("shim emitted a non-JSON line: {}", e.what()));
  }
  if (!j.is_object()) throw ProtocolError("shim result line is not an object");
  const auto status_it = j.find("status");
  if (status_it == j.end() || !status_it->is_string()) throw ProtocolError("shim result line has no status");
  const auto& status = status_it->get_ref<const std::string&>();
  if (status == "protocol_error") {
    throw ProtocolError(fmt::format("shim rejected the job: {}", j.value("detail", "")));
  }
  const auto case_it = j.find("case");
  if (case_it == j.end() || !case_it->is_number_unsigned() ||
      case_it->get<std::size_t>() != expected_case) {
    throw ProtocolError(fmt::format("shim result out of order: expected case {}, got {}", expected_case,
                                    case_it == j.end() ? "nothing" : case_it->dump()));
  }
  CaseOutcome out;
  if (status == "value") {
    if (!j.contains("value")) throw ProtocolError("value result without a value");
    out = CaseOutcome::of_value(j["value"]);
  } else if (status == "error") {
    out = CaseOutcome::failure(OutcomeStatus::kRuntimeError, j.value("detail", ""));
  } else if (status == "load_error") {
    out = CaseOutcome::failure(OutcomeStatus::kLoadError, j.value("detail", ""));
  } else {
    // "timeout" is the harness's verdict, never the shim's.
    throw ProtocolError(fmt::format("shim emitted unexpected status '{}'", status));
  }
  if (j.contains("detail") && j["detail"].is_string() && out.detail.empty()) {
    out.detail = j["detail"].get<std::string>();
  }
  return out;
}

}  // namespace

ProgramRun run_program(const ShimConfig& shim, const ProgramJob& job, const RunLimits& limits) {
  if (job.cases.empty()) throw InvalidArgumentError("cannot run a program on an empty suite");
  const std::string shim_path = shim.shim_path.empty() ? default_shim_path() : shim.shim_path;
  if (!std::filesystem::exists(shim_path)) {
    throw ExecutionEnvironmentError(fmt::format("shim script '{}' not found", shim_path));
  }
  const std::vector<std::pair<std::string, std::string>> env{
      {"PYTHONHASHSEED", "0"}, {"PYTHONDONTWRITEBYTECODE", "1"}, {"PYTHONIOENCODING", "utf-8"}};

  const std::size_t n = job.cases.size();
  ProgramRun run;
  run.outcomes.reserve(n);
  run.wall_time_ms.reserve(n);

  std::size_t next = 0;
  while (next < n) {
    // One interpreter per attempt; it serves cases [offset, n) until it hangs or dies.
    const std::size_t offset = next;
    ProgramJob slice{job.source, job.entry_point, job.adapter, job.cases.subspan(offset)};
    Subprocess proc({shim.interpreter, shim_path}, env);
    proc.write_and_close_stdin(slice.to_wire().dump() + "\n");

    bool restart = false;
    while (next < n && !restart) {
      const auto started = Clock::now();
      auto line = proc.read_line(limits.timeout, limits.max_output_bytes);
      switch (line.status) {
        case Subprocess::ReadStatus::kLine:
          run.outcomes.push_back(parse_result_line(line.line, next - offset));
          break;
        case Subprocess::ReadStatus::kTimeout:
          run.outcomes.push_back(CaseOutcome::failure(
              OutcomeStatus::kTimeout, fmt::format("exceeded {} ms", limits.timeout.count())));
          restart = true;
          break;
        case Subprocess::ReadStatus::kTooLong:
          run.outcomes.push_back(CaseOutcome::failure(
              OutcomeStatus::kRuntimeError,
              fmt::format("output exceeds {} bytes", limits.max_output_bytes)));
          restart = true;
          break;
        case Subprocess::ReadStatus::kEof: {
          const int status = proc.wait();
          run.outcomes.push_back(CaseOutcome::failure(
              OutcomeStatus::kRuntimeError, fmt::format("interpreter exited with status {}", status)));
          restart = true;
          break;
        }
      }
      run.wall_time_ms.push_back(elapsed_ms(started));
      ++next;
    }
    proc.kill();
  }
  return run;
}

ShimExecutor::ShimExecutor(ShimConfig config) : config_(std::move(config)) {
  if (config_.shim_path.empty()) config_.shim_path = default_shim_path();
}

ProgramRun ShimExecutor::run(const ProgramJob& job, const RunLimits& limits) {
  return run_program(config_, job, limits);
}

void RecordedExecutor::add(const std::string& source, std::span<const TestCase> cases,
                           const OutcomeVector& outcomes) {
  if (cases.size() != outcomes.size()) {
    throw InvalidArgumentError("recorded outcomes must align with their cases");
  }
  std::lock_guard lock(mutex_);
  auto& by_input = recorded_[source];
  for (std::size_t i = 0; i < cases.size(); ++i) by_input[cases[i].input.dump()] = outcomes[i];
}

ProgramRun RecordedExecutor::run(const ProgramJob& job, const RunLimits&) {
  std::lock_guard lock(mutex_);
  ++calls_;
  const auto it = recorded_.find(job.source);
  if (it == recorded_.end()) {
    throw ExecutionEnvironmentError("no recorded outcomes for this program");
  }
  ProgramRun run;
  for (const auto& tc : job.cases) {
    const auto found = it->second.find(tc.input.dump());
    if (found == it->second.end()) {
      throw ExecutionEnvironmentError(fmt::format("no recorded outcome for input {}", tc.input.dump()));
    }
    run.outcomes.push_back(found->second);
  }
  run.wall_time_ms.assign(job.cases.size(), 0);
  return run;
}

std::size_t RecordedExecutor::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

bool passes_all(const OutcomeVector& outcomes, const std::vector<TestCase>& cases) {
  if (outcomes.size() != cases.size()) return false;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (!outcomes[i].is_value() || !compare_values(outcomes[i].value, cases[i].expected)) return false;
  }
  return true;
}

Json to_json(const TrialResult& r) {
  Json outcomes = Json::array();
  for (const auto& o : r.outcomes) outcomes.push_back(to_json(o));
  return {{"candidate", to_json(r.candidate)},
          {"outcomes", std::move(outcomes)},
          {"pass_all", r.pass_all},
          {"no_code", r.no_code},
          {"wall_time_ms", r.wall_time_ms}};
}

TrialResult trial_result_from_json(const Json& j) {
  TrialResult r;
  r.candidate = candidate_ref_from_json(j.at("candidate"));
  for (const auto& o : j.at("outcomes")) r.outcomes.push_back(case_outcome_from_json(o));
  r.pass_all = j.at("pass_all").get<bool>();
  r.no_code = j.value("no_code", false);
  r.wall_time_ms = j.value("wall_time_ms", std::vector<std::int64_t>{});
  return r;
}

TrialResult evaluate_trial(const PatchCandidate& candidate, const Problem& problem,
                           ProgramExecutor& executor, const RunLimits& limits) {
  TrialResult r;
  r.candidate = candidate.ref();
  const std::size_t n = problem.test_cases.size();
  if (candidate.extracted_code.empty()) {
    r.no_code = true;
    r.outcomes.assign(n, CaseOutcome::failure(OutcomeStatus::kLoadError, "response contains no code"));
    r.wall_time_ms.assign(n, 0);
    return r;
  }
  const ProgramJob job{candidate.extracted_code, problem.entry_point, problem.adapter, problem.test_cases};
  ProgramRun run = executor.run(job, limits);
  if (run.outcomes.size() != n) {
    throw ProtocolError(fmt::format("executor returned {} outcomes for {} cases", run.outcomes.size(), n));
  }
  r.outcomes = std::move(run.outcomes);
  r.wall_time_ms = std::move(run.wall_time_ms);
  r.pass_all = passes_all(r.outcomes, problem.test_cases);
  return r;
}

std::vector<TrialResult> evaluate_trials(std::span<const PatchCandidate> candidates,
                                         const std::vector<Problem>& problems,
                                         ProgramExecutor& executor, const RunLimits& limits,
                                         unsigned workers) {
  std::map<std::string, const Problem*> by_name;
  for (const auto& p : problems) by_name.emplace(p.name, &p);
  for (const auto& c : candidates) {
    if (!by_name.contains(c.problem_name)) {
      throw InvalidArgumentError(fmt::format("candidate for unknown problem '{}'", c.problem_name));
    }
  }

  std::vector<TrialResult> results(candidates.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto work = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= candidates.size()) return;
      try {
        results[i] = evaluate_trial(candidates[i], *by_name.at(candidates[i].problem_name), executor, limits);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
      }
    }
  };

  const unsigned count = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(candidates.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < count; ++w) pool.emplace_back(work);
    work();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

ValidationReport validate_problem(const Problem& problem, ProgramExecutor& executor,
                                  const RunLimits& limits, bool check_bug) {
  ValidationReport report;
  report.problem = problem.name;
  const OutcomeVector expected = expected_as_outcomes(problem.expected_values());

  const ProgramJob reference{problem.reference_source, problem.entry_point, problem.adapter,
                             problem.test_cases};
  const ProgramRun ref_run = executor.run(reference, limits);
  if (ref_run.outcomes.size() != expected.size()) {
    throw ProtocolError(fmt::format("executor returned {} outcomes for {} cases", ref_run.outcomes.size(),
                                    expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (!outcomes_equivalent(ref_run.outcomes[i], expected[i])) report.failing_cases.push_back(i);
  }
  report.reference_oer = metrics::oer(ref_run.outcomes, expected);
  report.valid = report.failing_cases.empty();

  if (check_bug) {
    report.bug_checked = true;
    // Case by case, so a looping bug costs at most one timeout.
    const std::span<const TestCase> cases(problem.test_cases);
    for (std::size_t i = 0; i < cases.size() && !report.bug_detected; ++i) {
      const ProgramJob buggy{problem.buggy_source, problem.entry_point, problem.adapter, cases.subspan(i, 1)};
      const ProgramRun run = executor.run(buggy, limits);
      if (run.outcomes.size() != 1 || !outcomes_equivalent(run.outcomes[0], expected[i])) {
        report.bug_detected = true;
        report.bug_case = i;
      }
    }
    if (!report.bug_detected) {
      report.warnings.push_back("buggy version passes every test case; the suite cannot detect the bug");
    }
  }
  return report;
}

}  // namespace patchgate
