#pragma once

// Success/failure patterns for 20 problems x 3 temperatures, transcribed into
// tests/data/outcome_tables.csv, turned into synthetic candidates and trials.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "patchgate/generation.hpp"
#include "patchgate/oracle.hpp"

namespace patchgate::testing {

struct TableRow {
  double temperature = 0.0;
  std::string problem;
  std::size_t count = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::string mean, variance, stddev, success_rate_pct;  // as printed, 2 decimals
  std::string category;
};

inline std::vector<TableRow> load_table_rows() {
  const auto path = std::filesystem::path(PATCHGATE_SOURCE_DIR) / "tests" / "data" / "outcome_tables.csv";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<TableRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 10) throw std::runtime_error("bad row: " + line);
    rows.push_back({std::stod(f[0]), f[1], std::stoul(f[2]), std::stoul(f[3]), std::stoul(f[4]), f[5], f[6], f[7],
                    f[8], f[9]});
  }
  return rows;
}

struct SyntheticRun {
  std::vector<PatchCandidate> candidates;
  std::vector<TrialResult> trials;
};

// The first `successes` trials of every row pass; candidate text differs
// between passing and failing trials.
inline SyntheticRun synthesize(const std::vector<TableRow>& rows) {
  SyntheticRun run;
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.count; ++k) {
      const bool pass = k < r.successes;
      PatchCandidate c;
      c.problem_name = r.problem;
      c.temperature = r.temperature;
      c.trial_index = static_cast<int>(k);
      c.extracted_code = pass ? "def " + r.problem + "(x):\n    return x\n" : "def " + r.problem + "(x):\n    return None\n";
      c.raw_response = c.extracted_code;
      TrialResult t;
      t.candidate = c.ref();
      t.pass_all = pass;
      t.outcomes = {pass ? CaseOutcome::of_value(1) : CaseOutcome::of_value(0)};
      t.wall_time_ms = {1};
      run.candidates.push_back(std::move(c));
      run.trials.push_back(std::move(t));
    }
  }
  return run;
}

}  // namespace patchgate::testing
