#include "commands.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <map>
#include <memory>
#include <sstream>

#include <fmt/format.h>

#include "patchgate/analysis.hpp"
#include "patchgate/cassette.hpp"
#include "patchgate/corpus.hpp"
#include "patchgate/digest.hpp"
#include "patchgate/errors.hpp"
#include "patchgate/http_provider.hpp"
#include "patchgate/text.hpp"

namespace patchgate::cli {

namespace {

constexpr const char* kLockFile = ".patchgate.lock";

// Exclusive marker in out_dir; concurrent runs on one directory are refused.
class RunLock {
 public:
  explicit RunLock(const fs::path& dir) : path_(dir / kLockFile) {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY | O_CLOEXEC, 0644);
    if (fd < 0) {
      throw ConfigError(fmt::format("{} exists: another run is using this directory (delete it if stale)",
                                    path_.string()));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
};

void check_unit_interval(const char* name, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(fmt::format("{} must be in [0, 1], got {}", name, v));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IOError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

void remove_tree(const fs::path& p) {
  std::error_code ec;
  fs::remove_all(p, ec);
  if (ec) throw IOError(fmt::format("cannot clear {}: {}", p.string(), ec.message()));
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
  } catch (const Json::exception& e) {
    err << "error (parse): " << e.what() << "\n";
  } catch (const fs::filesystem_error& e) {
    err << "error (io): " << e.what() << "\n";
  }
  return kExitInfra;
}

std::string cassette_digest(const std::vector<PatchCandidate>& candidates) {
  Sha256Builder h;
  for (const auto& c : candidates) h.field(c.cassette_key).field(c.raw_response);
  return h.hex();
}

struct TrialArtifact {
  PatchCandidate candidate;
  TrialResult result;
  std::string extension;
};

std::vector<TrialArtifact> load_trial_artifacts(const fs::path& results_dir) {
  const fs::path trials_dir = results_dir / "trials";
  if (!fs::is_directory(trials_dir)) {
    throw NotFoundError(fmt::format("{} has no trials/ directory; run `patchgate run` first", results_dir.string()));
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(trials_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<TrialArtifact> out;
  for (const auto& f : files) {
    Json j;
    try {
      j = Json::parse(read_file(f.string()));
      out.push_back({patch_candidate_from_json(j.at("candidate")), trial_result_from_json(j.at("result")),
                     j.at("extension").get<std::string>()});
    } catch (const Json::exception& e) {
      throw ParseError(fmt::format("{}: {}", f.string(), e.what()));
    }
  }
  if (out.empty()) throw NotFoundError(fmt::format("no trial artifacts under {}", trials_dir.string()));
  return out;
}

}  // namespace

std::string artifact_stem(const CandidateRef& ref) {
  return fmt::format("{}/T{}_trial{}", ref.problem, temperature_label(ref.temperature), ref.trial_index);
}

std::vector<double> parse_temperature_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : parse_name_list(text)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError(fmt::format("bad temperature '{}'", item));
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty temperature list");
  return out;
}

std::vector<std::string> parse_name_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void RunConfig::validate() const {
  if (corpus_root.empty()) throw ConfigError("--corpus is required");
  if (out_dir.empty()) throw ConfigError("--out is required");
  if (trials < 1) throw ConfigError("--trials must be positive");
  if (workers < 1) throw ConfigError("--workers must be positive");
  if (timeout_ms < 1) throw ConfigError("--timeout-ms must be positive");
  check_unit_interval("low threshold", low_threshold);
  check_unit_interval("oer threshold", oer_threshold);
  check_unit_interval("tau", tau);
  plan().validate();

  switch (mode) {
    case SamplingMode::kReplay:
      if (cassette_path.empty()) throw ConfigError("replay mode needs --cassette");
      if (!fs::is_regular_file(cassette_path)) {
        throw ConfigError(fmt::format("cassette {} does not exist", cassette_path.string()));
      }
      break;
    case SamplingMode::kRecord:
      if (cassette_path.empty()) throw ConfigError("record mode needs --cassette");
      [[fallthrough]];
    case SamplingMode::kLive:
      if (provider == nullptr) HttpChatProvider::api_key_from_env();
      break;
  }
}

SamplingPlan RunConfig::plan() const {
  SamplingPlan p;
  p.temperatures = temperatures;
  std::sort(p.temperatures.begin(), p.temperatures.end());
  p.trials_per_temperature = trials;
  p.model_id = model_id;
  p.prompt_template = prompt_template;
  return p;
}

RunLimits RunConfig::limits() const {
  RunLimits l;
  l.timeout = std::chrono::milliseconds(timeout_ms);
  return l;
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto started = std::chrono::steady_clock::now();
    const std::string started_at = Cassette::utc_now();
    config.validate();
    const SamplingPlan plan = config.plan();
    const RunLimits limits = config.limits();

    ensure_dir(config.out_dir);
    RunLock lock(config.out_dir);

    const auto problems = load_corpus(config.corpus_root, config.problems);
    if (problems.empty()) throw EmptyCorpusError(fmt::format("no problems under {}", config.corpus_root.string()));

    std::unique_ptr<ProgramExecutor> owned_executor;
    ProgramExecutor* executor = config.executor;
    if (executor == nullptr) {
      owned_executor = std::make_unique<ShimExecutor>(config.shim);
      executor = owned_executor.get();
    }

    for (const auto& p : problems) {
      const auto v = validate_problem(p, *executor, limits, /*check_bug=*/false);
      if (!v.valid) {
        std::vector<std::string> cases;
        for (auto i : v.failing_cases) cases.push_back(std::to_string(i));
        throw ValidationError(fmt::format("reference for {} fails case(s) {}; run `patchgate validate`", p.name,
                                          fmt::join(cases, ",")));
      }
    }

    std::optional<Cassette> cassette;
    if (config.mode == SamplingMode::kReplay) cassette = Cassette::load(config.cassette_path);
    if (config.mode == SamplingMode::kRecord) cassette = Cassette::open(config.cassette_path);
    std::unique_ptr<ChatProvider> owned_provider;
    ChatProvider* provider = config.provider;
    if (provider == nullptr && config.mode != SamplingMode::kReplay) {
      owned_provider = std::make_unique<HttpChatProvider>(config.base_url, HttpChatProvider::api_key_from_env());
      provider = owned_provider.get();
    }
    const ResponseSource source{config.mode, provider, cassette ? &*cassette : nullptr};

    std::vector<PatchCandidate> candidates;
    std::map<std::string, const Problem*> by_name;
    for (const auto& p : problems) {
      by_name[p.name] = &p;
      auto drawn = sample_patches(p, plan, source);
      candidates.insert(candidates.end(), std::make_move_iterator(drawn.begin()),
                        std::make_move_iterator(drawn.end()));
    }

    const auto results = evaluate_trials(candidates, problems, *executor, limits, config.workers);

    for (const char* sub : {"candidates", "trials", "gate"}) remove_tree(config.out_dir / sub);
    remove_tree(config.out_dir / "gate.json");
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto& c = candidates[i];
      const std::string ext = "." + by_name.at(c.problem_name)->source_extension;
      const std::string stem = artifact_stem(c.ref());
      write_file_atomic((config.out_dir / "candidates" / (stem + ext)).string(), c.extracted_code);
      const Json trial{{"candidate", to_json(c)}, {"result", to_json(results[i])}, {"extension", ext}};
      write_file_atomic((config.out_dir / "trials" / (stem + ".json")).string(), trial.dump(2) + "\n");
    }

    analysis::RunMetadata meta{to_json(plan), cassette_digest(candidates), corpus_digest(problems),
                               config.low_threshold};
    const auto report = analysis::build_report(candidates, results, std::move(meta));
    analysis::export_report(report, analysis::ReportFormat::kJson, config.out_dir, err);
    analysis::export_report(report, analysis::ReportFormat::kCsv, config.out_dir, err);
    analysis::emit_heatmap_svg(report, config.out_dir / "heatmap.svg");

    const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    const Json info{{"started_at", started_at},
                    {"finished_at", Cassette::utc_now()},
                    {"wall_time_ms", wall.count()},
                    {"mode", std::string(to_string(config.mode))},
                    {"problems", problems.size()},
                    {"trials", candidates.size()},
                    {"workers", config.workers}};
    write_file_atomic((config.out_dir / "run_info.json").string(), info.dump(2) + "\n");

    out << fmt::format("{} problems, {} trials -> {}\n", problems.size(), candidates.size(),
                       config.out_dir.string());
    for (const auto& [t, g] : report.general_oer) {
      const auto& counts = report.category_distribution.at(t);
      out << fmt::format("T={}  general OER {:.4f}  fully {} / partially {} / failed {}\n", temperature_label(t), g,
                         counts.fully, counts.partially, counts.failed);
    }
    return kExitOk;
  });
}

int cmd_gate(const GateConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    check_unit_interval("oer threshold", config.oer_threshold);
    check_unit_interval("tau", config.tau);
    if (!fs::is_regular_file(config.results_dir / "report.json")) {
      throw NotFoundError(fmt::format("{} has no report.json", config.results_dir.string()));
    }
    auto artifacts = load_trial_artifacts(config.results_dir);

    std::map<std::pair<std::string, double>, std::vector<const TrialArtifact*>> groups;
    for (const auto& a : artifacts) {
      if (config.problems &&
          std::find(config.problems->begin(), config.problems->end(), a.candidate.problem_name) ==
              config.problems->end()) {
        continue;
      }
      groups[{a.candidate.problem_name, a.candidate.temperature}].push_back(&a);
    }
    if (groups.empty()) throw NotFoundError("no trial artifacts match the requested problems");

    const fs::path gate_dir = config.results_dir / "gate";
    remove_tree(gate_dir);

    Json decisions = Json::array();
    bool all_accept = true;
    for (auto& [key, members] : groups) {
      std::sort(members.begin(), members.end(), [](const TrialArtifact* a, const TrialArtifact* b) {
        return a->candidate.ref() < b->candidate.ref();
      });
      std::vector<PatchCandidate> cands;
      std::vector<TrialResult> results;
      for (const auto* m : members) {
        cands.push_back(m->candidate);
        results.push_back(m->result);
      }
      const auto d = gate::decide(cands, results, config.oer_threshold, config.policy, config.tau);

      Json entry = gate::to_json(d);
      entry["problem"] = key.first;
      entry["temperature"] = key.second;
      entry["patch_file"] = nullptr;
      if (d.verdict == gate::Verdict::kAccept) {
        const auto it = std::find_if(members.begin(), members.end(), [&](const TrialArtifact* m) {
          return m->candidate.ref() == *d.selected_patch;
        });
        if (it == members.end() || !(*it)->result.pass_all) {
          throw ValidationError(fmt::format("accepted patch {} has no passing trial", to_string(*d.selected_patch)));
        }
        const fs::path rel = fs::path("gate") / (artifact_stem(*d.selected_patch) + (*it)->extension);
        write_file_atomic((config.results_dir / rel).string(), (*it)->candidate.extracted_code);
        if (read_file((config.results_dir / rel).string()) != (*it)->candidate.extracted_code) {
          throw IOError(fmt::format("patch file {} did not persist", rel.string()));
        }
        entry["patch_file"] = rel.generic_string();
      } else {
        all_accept = false;
      }
      out << fmt::format("{} T={}: {} (success rate {}){}\n", key.first, temperature_label(key.second),
                         gate::to_string(d.verdict), format_display(d.success_rate),
                         d.reasons.empty() ? "" : fmt::format(" [{}]", fmt::join(d.reasons, "; ")));
      decisions.push_back(std::move(entry));
    }

    const Json doc{{"verdict", all_accept ? "Accept" : "Reject"},
                   {"oer_threshold", config.oer_threshold},
                   {"tau", config.tau},
                   {"policy", std::string(gate::to_string(config.policy))},
                   {"decisions", std::move(decisions)}};
    write_file_atomic((config.results_dir / "gate.json").string(), doc.dump(2) + "\n");
    out << "overall: " << (all_accept ? "Accept" : "Reject") << "\n";
    return all_accept ? kExitOk : kExitReject;
  });
}

int cmd_validate(const ValidateConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (config.timeout_ms < 1) throw ConfigError("--timeout-ms must be positive");
    const auto problems = load_corpus(config.corpus_root, config.problems);
    if (problems.empty()) throw EmptyCorpusError(fmt::format("no problems under {}", config.corpus_root.string()));

    std::unique_ptr<ProgramExecutor> owned;
    ProgramExecutor* executor = config.executor;
    if (executor == nullptr) {
      owned = std::make_unique<ShimExecutor>(config.shim);
      executor = owned.get();
    }
    RunLimits limits;
    limits.timeout = std::chrono::milliseconds(config.timeout_ms);

    bool all_valid = true;
    Json doc = Json::array();
    for (const auto& p : problems) {
      const auto v = validate_problem(p, *executor, limits, /*check_bug=*/true);
      all_valid = all_valid && v.valid;
      std::string line = fmt::format("{}: {} (reference oer {}", p.name, v.valid ? "ok" : "INVALID",
                                     format_display(v.reference_oer));
      if (!v.failing_cases.empty()) line += fmt::format(", failing cases {}", fmt::join(v.failing_cases, ","));
      line += v.bug_detected ? fmt::format(", bug detected at case {})", *v.bug_case) : ", bug NOT detected)";
      out << line << "\n";
      for (const auto& w : v.warnings) err << "warning: " << p.name << ": " << w << "\n";
      doc.push_back(Json{{"problem", v.problem},
                         {"valid", v.valid},
                         {"failing_cases", v.failing_cases},
                         {"reference_oer", v.reference_oer},
                         {"bug_checked", v.bug_checked},
                         {"bug_detected", v.bug_detected},
                         {"bug_case", v.bug_case ? Json(*v.bug_case) : Json(nullptr)},
                         {"warnings", v.warnings}});
    }
    if (config.report_path) write_file_atomic(config.report_path->string(), doc.dump(2) + "\n");
    return all_valid ? kExitOk : kExitReject;
  });
}

int cmd_report(const ReportConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto format = analysis::report_format_from_string(config.format);
    const fs::path src = config.results_dir / "report.json";
    if (!fs::is_regular_file(src)) throw NotFoundError(fmt::format("{} not found", src.string()));
    const auto report = analysis::run_report_from_json(Json::parse(read_file(src.string())));
    auto written = analysis::export_report(report, format, config.results_dir, err);
    if (config.svg) written.push_back(analysis::emit_heatmap_svg(report, config.results_dir / "heatmap.svg"));
    for (const auto& p : written) out << p.string() << "\n";
    return kExitOk;
  });
}

}  // namespace patchgate::cli
