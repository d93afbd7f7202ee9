#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "patchgate/errors.hpp"

namespace {

using namespace patchgate;
using namespace patchgate::cli;

constexpr const char* kPolicyNames = "majority, first_passing or best_cluster";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-sample patch evaluation and admission gate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "patchgate 0.1.0");

  RunConfig run;
  run.workers = std::max(1u, std::thread::hardware_concurrency());
  std::string temps = "0,0.5,1";
  std::string mode = "replay";
  std::string problems;
  std::string shim_path;
  auto* run_cmd = app.add_subcommand("run", "Sample, evaluate and report");
  run_cmd->add_option("--corpus", run.corpus_root, "Corpus root directory")->required();
  run_cmd->add_option("--temps", temps, "Comma-separated temperatures")->capture_default_str();
  run_cmd->add_option("--trials", run.trials, "Trials per temperature")->capture_default_str();
  run_cmd->add_option("--mode", mode, "live, record or replay")->capture_default_str();
  run_cmd->add_option("--cassette", run.cassette_path, "Response cassette (JSONL)");
  run_cmd->add_option("--out", run.out_dir, "Output directory")->required();
  run_cmd->add_option("--problems", problems, "Comma-separated problem filter");
  run_cmd->add_option("--workers", run.workers, "Parallel trial evaluations")->capture_default_str();
  run_cmd->add_option("--timeout-ms", run.timeout_ms, "Per-case timeout")->capture_default_str();
  run_cmd->add_option("--low-threshold", run.low_threshold, "Low-similarity cutoff")->capture_default_str();
  run_cmd->add_option("--model", run.model_id, "Chat model id")->capture_default_str();
  run_cmd->add_option("--base-url", run.base_url, "Chat-completions API base URL")->capture_default_str();
  run_cmd->add_option("--python", run.shim.interpreter, "Python interpreter")->capture_default_str();
  run_cmd->add_option("--shim", shim_path, "Path to patchgate_shim.py");

  GateConfig gate_cfg;
  std::string policy = "majority";
  std::string gate_problems;
  auto* gate_cmd = app.add_subcommand("gate", "Admission decision from a prior run");
  gate_cmd->add_option("--results", gate_cfg.results_dir, "Directory written by `run`")->required();
  gate_cmd->add_option("--oer-threshold", gate_cfg.oer_threshold, "Minimum pass fraction")->capture_default_str();
  gate_cmd->add_option("--tau", gate_cfg.tau, "Clustering similarity threshold")->capture_default_str();
  gate_cmd->add_option("--policy", policy, std::string("Selection policy: ") + kPolicyNames)->capture_default_str();
  gate_cmd->add_option("--problems", gate_problems, "Comma-separated problem filter");

  ValidateConfig val;
  std::string val_problems;
  std::string val_shim;
  std::string val_report;
  auto* val_cmd = app.add_subcommand("validate", "Check references pass and bugs are detected");
  val_cmd->add_option("--corpus", val.corpus_root, "Corpus root directory")->required();
  val_cmd->add_option("--problems", val_problems, "Comma-separated problem filter");
  val_cmd->add_option("--timeout-ms", val.timeout_ms, "Per-case timeout")->capture_default_str();
  val_cmd->add_option("--python", val.shim.interpreter, "Python interpreter")->capture_default_str();
  val_cmd->add_option("--shim", val_shim, "Path to patchgate_shim.py");
  val_cmd->add_option("--report", val_report, "Also write results as JSON to this file");

  ReportConfig rep;
  auto* rep_cmd = app.add_subcommand("report", "Re-export a run's report");
  rep_cmd->add_option("--results", rep.results_dir, "Directory written by `run`")->required();
  rep_cmd->add_option("--format", rep.format, "csv or json")->capture_default_str();
  rep_cmd->add_flag("--svg", rep.svg, "Also write heatmap.svg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInfra;
  }

  try {
    if (*run_cmd) {
      run.temperatures = parse_temperature_list(temps);
      run.mode = sampling_mode_from_string(mode);
      if (!problems.empty()) run.problems = parse_name_list(problems);
      if (!shim_path.empty()) run.shim.shim_path = shim_path;
      return cmd_run(run, std::cout, std::cerr);
    }
    if (*gate_cmd) {
      gate_cfg.policy = gate::selection_policy_from_string(policy);
      if (!gate_problems.empty()) gate_cfg.problems = parse_name_list(gate_problems);
      return cmd_gate(gate_cfg, std::cout, std::cerr);
    }
    if (*val_cmd) {
      if (!val_problems.empty()) val.problems = parse_name_list(val_problems);
      if (!val_shim.empty()) val.shim.shim_path = val_shim;
      if (!val_report.empty()) val.report_path = val_report;
      return cmd_validate(val, std::cout, std::cerr);
    }
    if (*rep_cmd) return cmd_report(rep, std::cout, std::cerr);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
  }
  return kExitInfra;
}
