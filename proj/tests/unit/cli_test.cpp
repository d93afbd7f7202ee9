#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli/commands.hpp"
#include "patchgate/cassette.hpp"
#include "patchgate/corpus.hpp"
#include "patchgate/errors.hpp"
#include "patchgate/http_provider.hpp"
#include "patchgate/text.hpp"
#include "temp_dir.hpp"

using namespace patchgate;
using namespace patchgate::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = PATCHGATE_SOURCE_DIR;

RunConfig replay_config(const fs::path& out, std::vector<std::string> problems) {
  RunConfig c;
  c.corpus_root = kRoot / "corpus";
  c.cassette_path = kRoot / "fixtures" / "cassette.jsonl";
  c.out_dir = out;
  c.problems = std::move(problems);
  c.workers = 2;
  return c;
}

struct Captured {
  int code;
  std::string out;
  std::string err;
};

template <typename Cfg, typename Fn>
Captured capture(Fn fn, const Cfg& cfg) {
  std::ostringstream out, err;
  const int code = fn(cfg, out, err);
  return {code, out.str(), err.str()};
}

int shell(const std::string& args) {
  const int status = std::system((std::string(PATCHGATE_CLI_BINARY) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class EchoProvider : public ChatProvider {
 public:
  std::string complete(const ChatRequest&) override {
    ++calls;
    return "```python\ndef kth(arr, k):\n    return sorted(arr)[k]\n```";
  }
  int calls = 0;
};

}  // namespace

TEST(ParseLists, TemperaturesAndNames) {
  EXPECT_EQ(parse_temperature_list("0, 0.5,1"), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_THROW(parse_temperature_list("0,hot"), ConfigError);
  EXPECT_THROW(parse_temperature_list(""), ConfigError);
  EXPECT_EQ(parse_name_list("kth, lis,,"), (std::vector<std::string>{"kth", "lis"}));
  EXPECT_EQ(artifact_stem({"kth", 0.5, 2}), "kth/T0.5_trial2");
}

TEST(CmdRun, ReplaySubsetWritesEveryArtifact) {
  patchgate::testing::TempDir tmp;
  const auto r = capture(cmd_run, replay_config(tmp.path(), {"kth", "rpn_eval"}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* f : {"report.json", "stability.csv", "oer.csv", "heatmap.svg", "run_info.json",
                        "candidates/kth/T0.0_trial0.py", "trials/rpn_eval/T1.0_trial2.json"}) {
    EXPECT_TRUE(fs::exists(tmp.path() / f)) << f;
  }
  EXPECT_FALSE(fs::exists(tmp.path() / ".patchgate.lock"));
  const auto report = Json::parse(read_file((tmp.path() / "report.json").string()));
  EXPECT_EQ(report["heatmap"]["problems"], Json::parse(R"(["kth","rpn_eval"])"));
  EXPECT_EQ(report["oer"].size(), 6u);
  EXPECT_EQ(report.dump().find("started_at"), std::string::npos);
}

TEST(CmdRun, SingleProblemFilter) {
  patchgate::testing::TempDir tmp;
  ASSERT_EQ(capture(cmd_run, replay_config(tmp.path(), {"kth"})).code, kExitOk);
  const auto report = Json::parse(read_file((tmp.path() / "report.json").string()));
  EXPECT_EQ(report["heatmap"]["problems"].size(), 1u);
}

TEST(CmdRun, TruncatedCassetteIsCassetteMiss) {
  patchgate::testing::TempDir tmp;
  const auto full = read_file((kRoot / "fixtures" / "cassette.jsonl").string());
  std::string head;
  std::istringstream in(full);
  for (std::string line; head.size() < full.size() / 2 && std::getline(in, line);) head += line + "\n";
  write_file_atomic((tmp.path() / "short.jsonl").string(), head);
  auto cfg = replay_config(tmp.path() / "out", {});
  cfg.problems.reset();
  cfg.cassette_path = tmp.path() / "short.jsonl";
  const auto r = capture(cmd_run, cfg);
  EXPECT_EQ(r.code, kExitInfra);
  EXPECT_NE(r.err.find("CassetteMiss"), std::string::npos) << r.err;
}

TEST(CmdRun, ConfigurationErrors) {
  patchgate::testing::TempDir tmp;
  auto missing = replay_config(tmp.path(), {"kth"});
  missing.cassette_path = tmp.path() / "nope.jsonl";
  EXPECT_EQ(capture(cmd_run, missing).code, kExitInfra);

  auto bad_trials = replay_config(tmp.path(), {"kth"});
  bad_trials.trials = 0;
  EXPECT_EQ(capture(cmd_run, bad_trials).code, kExitInfra);

  auto unknown = replay_config(tmp.path(), {"not_a_problem"});
  EXPECT_EQ(capture(cmd_run, unknown).code, kExitInfra);

  ::unsetenv(kApiKeyEnv);
  auto record = replay_config(tmp.path(), {"kth"});
  record.mode = SamplingMode::kRecord;
  record.cassette_path = tmp.path() / "new.jsonl";
  const auto r = capture(cmd_run, record);
  EXPECT_EQ(r.code, kExitInfra);
  EXPECT_NE(r.err.find(kApiKeyEnv), std::string::npos);
}

TEST(CmdRun, RecordModeFillsTheCassette) {
  patchgate::testing::TempDir tmp;
  EchoProvider provider;
  auto cfg = replay_config(tmp.path() / "out", {"kth"});
  cfg.mode = SamplingMode::kRecord;
  cfg.cassette_path = tmp.path() / "rec.jsonl";
  cfg.trials = 2;
  cfg.provider = &provider;
  ASSERT_EQ(capture(cmd_run, cfg).code, kExitOk);
  EXPECT_EQ(provider.calls, 6);
  EXPECT_EQ(Cassette::load(cfg.cassette_path).size(), 6u);

  cfg.mode = SamplingMode::kReplay;
  cfg.provider = nullptr;
  const auto r = capture(cmd_run, cfg);
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("general OER 1.0000"), std::string::npos) << r.out;
}

TEST(CmdRun, LockfileRefusesConcurrentUse) {
  patchgate::testing::TempDir tmp;
  std::ofstream(tmp.path() / ".patchgate.lock") << "123\n";
  const auto r = capture(cmd_run, replay_config(tmp.path(), {"kth"}));
  EXPECT_EQ(r.code, kExitInfra);
  EXPECT_NE(r.err.find(".patchgate.lock"), std::string::npos);
}

TEST(CmdRun, BrokenReferenceAbortsRun) {
  patchgate::testing::TempDir tmp;
  auto p = load_corpus(kRoot / "corpus", std::vector<std::string>{"kth"}).front();
  p.test_cases[0].expected = -1;
  write_problem(p, tmp.path() / "corpus" / "kth");
  auto cfg = replay_config(tmp.path() / "out", {});
  cfg.problems.reset();
  cfg.corpus_root = tmp.path() / "corpus";
  const auto r = capture(cmd_run, cfg);
  EXPECT_EQ(r.code, kExitInfra);
  EXPECT_NE(r.err.find("kth"), std::string::npos);
}

TEST(CmdGate, ExitCodesFollowVerdicts) {
  patchgate::testing::TempDir tmp;
  ASSERT_EQ(capture(cmd_run, replay_config(tmp.path(), {"kth", "rpn_eval"})).code, kExitOk);

  GateConfig kth{tmp.path(), 0.7, 0.7, gate::SelectionPolicy::kMajority, std::vector<std::string>{"kth"}};
  const auto accepted = capture(cmd_gate, kth);
  ASSERT_EQ(accepted.code, kExitOk) << accepted.err;
  const auto doc = Json::parse(read_file((tmp.path() / "gate.json").string()));
  EXPECT_EQ(doc["verdict"], "Accept");
  ASSERT_EQ(doc["decisions"].size(), 3u);
  for (const auto& d : doc["decisions"]) {
    EXPECT_EQ(d["verdict"], "Accept");
    const auto patch = tmp.path() / d["patch_file"].get<std::string>();
    ASSERT_TRUE(fs::exists(patch));
    EXPECT_NE(read_file(patch.string()).find("def kth"), std::string::npos);
  }

  GateConfig rpn = kth;
  rpn.problems = std::vector<std::string>{"rpn_eval"};
  EXPECT_EQ(capture(cmd_gate, rpn).code, kExitReject);
  const auto rdoc = Json::parse(read_file((tmp.path() / "gate.json").string()));
  EXPECT_EQ(rdoc["verdict"], "Reject");
  for (const auto& d : rdoc["decisions"]) EXPECT_TRUE(d["patch_file"].is_null());

  GateConfig both = kth;
  both.problems.reset();
  EXPECT_EQ(capture(cmd_gate, both).code, kExitReject);
}

TEST(CmdGate, MissingResultsIsInfraError) {
  patchgate::testing::TempDir tmp;
  EXPECT_EQ(capture(cmd_gate, GateConfig{tmp.path()}).code, kExitInfra);
  EXPECT_EQ(capture(cmd_gate, GateConfig{tmp.path() / "absent"}).code, kExitInfra);
  std::ofstream(tmp.path() / "report.json") << "{}";
  EXPECT_EQ(capture(cmd_gate, GateConfig{tmp.path()}).code, kExitInfra);
}

TEST(CmdValidate, StubExecutorAndBrokenReference) {
  patchgate::testing::TempDir tmp;
  auto p = load_corpus(kRoot / "corpus", std::vector<std::string>{"kth"}).front();
  write_problem(p, tmp.path() / "kth");

  RecordedExecutor exec;
  const auto expected = expected_as_outcomes(p.expected_values());
  exec.add(p.reference_source, p.test_cases, expected);
  auto wrong = expected;
  wrong[0] = CaseOutcome::failure(OutcomeStatus::kRuntimeError, "IndexError");
  exec.add(p.buggy_source, p.test_cases, wrong);

  ValidateConfig cfg;
  cfg.corpus_root = tmp.path();
  cfg.executor = &exec;
  cfg.report_path = tmp.path() / "validation.json";
  const auto ok = capture(cmd_validate, cfg);
  EXPECT_EQ(ok.code, kExitOk) << ok.err;
  EXPECT_NE(ok.out.find("kth: ok"), std::string::npos);
  const auto doc = Json::parse(read_file(cfg.report_path->string()));
  EXPECT_EQ(doc[0]["bug_detected"], true);

  p.test_cases[2].expected = 424242;
  write_problem(p, tmp.path() / "kth");
  cfg.executor = nullptr;
  const auto bad = capture(cmd_validate, cfg);
  EXPECT_EQ(bad.code, kExitReject);
  EXPECT_NE(bad.out.find("kth: INVALID"), std::string::npos) << bad.out;
  EXPECT_NE(bad.out.find("failing cases 2"), std::string::npos) << bad.out;
}

TEST(CmdValidate, MissingCorpusIsInfraError) {
  ValidateConfig cfg;
  cfg.corpus_root = "/nonexistent/corpus";
  EXPECT_EQ(capture(cmd_validate, cfg).code, kExitInfra);
}

TEST(CmdReport, ReExportMatchesRun) {
  patchgate::testing::TempDir tmp;
  ASSERT_EQ(capture(cmd_run, replay_config(tmp.path(), {"kth", "lis"})).code, kExitOk);
  std::map<std::string, std::string> before;
  for (const char* f : {"report.json", "oer.csv", "stability.csv", "heatmap.svg"}) {
    before[f] = read_file((tmp.path() / f).string());
    fs::remove(tmp.path() / f);
  }
  write_file_atomic((tmp.path() / "report.json").string(), before["report.json"]);
  EXPECT_EQ(capture(cmd_report, ReportConfig{tmp.path(), "csv", true}).code, kExitOk);
  EXPECT_EQ(capture(cmd_report, ReportConfig{tmp.path(), "json", false}).code, kExitOk);
  for (const auto& [f, text] : before) EXPECT_EQ(read_file((tmp.path() / f).string()), text) << f;
  EXPECT_EQ(capture(cmd_report, ReportConfig{tmp.path(), "xml", false}).code, kExitInfra);
  EXPECT_EQ(capture(cmd_report, ReportConfig{tmp.path() / "none", "csv", false}).code, kExitInfra);
}

TEST(Binary, ExitCodesForUsageErrors) {
  EXPECT_EQ(shell("--help"), 0);
  EXPECT_EQ(shell(""), 2);
  EXPECT_EQ(shell("frobnicate"), 2);
  EXPECT_EQ(shell("run --corpus x"), 2);
  EXPECT_EQ(shell("gate --results /nonexistent --policy nope"), 2);
  EXPECT_EQ(shell("run --corpus x --out y --api-key k"), 2);
}
