// Builds the replay cassette bundled under fixtures/: for every problem,
// temperature and trial it records either a passing response (a variant of
// the reference) or a failing one (the buggy program, or fixtures/wrong/<name>
// when the bug would hang), following a per-problem success pattern.
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "patchgate/cassette.hpp"
#include "patchgate/corpus.hpp"
#include "patchgate/digest.hpp"
#include "patchgate/errors.hpp"
#include "patchgate/generation.hpp"
#include "patchgate/text.hpp"

namespace fs = std::filesystem;
using namespace patchgate;

namespace {

std::string vary(const std::string& code, double temperature, int trial) {
  // Small textual differences so stability statistics are not all 1.0.
  const int k = (trial + static_cast<int>(temperature * 2)) % 3;
  switch (k) {
    case 1: return "# corrected\n" + code;
    case 2: return code + "\n# end of fix";
    default: return code;
  }
}

std::string wrap(const std::string& code, const std::string& lang, int trial) {
  switch (trial % 3) {
    case 0: return fmt::format("Here is the corrected version:\n\n```{}\n{}\n```\n", lang, code);
    case 1: return fmt::format("```{}\n{}\n```", lang, code);
    default:
      return fmt::format("Sure. The fixed program is below.\n\n```{}\n{}\n```\n\nThis should now handle every case.\n",
                         lang, code);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the replay fixture cassette"};
  fs::path corpus_root = "corpus";
  fs::path patterns_path = "fixtures/reference_trials.json";
  fs::path wrong_dir = "fixtures/wrong";
  fs::path out_path = "fixtures/cassette.jsonl";
  std::string recorded_at = "2025-01-01T00:00:00Z";
  app.add_option("--corpus", corpus_root)->capture_default_str();
  app.add_option("--patterns", patterns_path)->capture_default_str();
  app.add_option("--wrong-dir", wrong_dir)->capture_default_str();
  app.add_option("--out", out_path)->capture_default_str();
  app.add_option("--recorded-at", recorded_at)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto patterns = Json::parse(read_file(patterns_path.string()));
    SamplingPlan plan;
    plan.temperatures = patterns.at("temperatures").get<std::vector<double>>();
    plan.trials_per_temperature = patterns.at("trials").get<int>();
    plan.validate();
    const auto& successes = patterns.at("successes");

    const auto problems = load_corpus(corpus_root);
    fs::remove(out_path);
    auto cassette = Cassette::open(out_path);
    cassette.set_clock([&] { return recorded_at; });

    for (const auto& p : problems) {
      if (!successes.contains(p.name)) throw NotFoundError(fmt::format("no success pattern for {}", p.name));
      const auto counts = successes.at(p.name).get<std::vector<int>>();
      if (counts.size() != plan.temperatures.size()) {
        throw ValidationError(fmt::format("{}: pattern has {} entries", p.name, counts.size()));
      }
      const fs::path wrong = wrong_dir / (p.name + "." + p.source_extension);
      const std::string failing = fs::exists(wrong) ? read_file(wrong.string()) : p.buggy_source;
      const std::string prompt = render_prompt(plan.prompt_template, p);

      for (std::size_t ti = 0; ti < plan.temperatures.size(); ++ti) {
        const double t = plan.temperatures[ti];
        for (int trial = 0; trial < plan.trials_per_temperature; ++trial) {
          const bool pass = trial < counts[ti];
          const std::string code = vary(normalize_code(pass ? p.reference_source : failing), t, trial);
          const ChatRequest request{plan.model_id, t, prompt};
          cassette.record(cassette_key(plan.model_id, t, prompt, trial), sha256_hex(request.body().dump()),
                          wrap(code, p.language_tag, trial));
        }
      }
    }
    std::cout << fmt::format("{} entries -> {}\n", cassette.size(), out_path.string());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
