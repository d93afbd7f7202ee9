#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "patchgate/generation.hpp"
#include "patchgate/metrics.hpp"
#include "patchgate/oracle.hpp"

namespace patchgate::analysis {

struct StabilityRow {
  std::string problem;
  double temperature = 0.0;
  std::size_t candidate_count = 0;
  std::optional<metrics::SimilarityStats> stats;  // absent: fewer than 2 candidates

  bool insufficient() const { return !stats.has_value(); }
  friend bool operator==(const StabilityRow&, const StabilityRow&) = default;
};

struct OERRow {
  std::string problem;
  double temperature = 0.0;
  std::size_t count = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  double mean = 0.0;
  double variance = 0.0;
  double stddev = 0.0;
  double success_rate_pct = 0.0;
  metrics::SuccessCategory category = metrics::SuccessCategory::kFailed;

  friend bool operator==(const OERRow&, const OERRow&) = default;
};

struct CategoryCounts {
  std::size_t fully = 0;
  std::size_t partially = 0;
  std::size_t failed = 0;

  std::size_t total() const { return fully + partially + failed; }
  friend bool operator==(const CategoryCounts&, const CategoryCounts&) = default;
};

/// Five-number summary (linear-interpolated quartiles) of per-problem
/// average similarity at one temperature.
struct BoxplotSummary {
  double temperature = 0.0;
  std::size_t n = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;

  friend bool operator==(const BoxplotSummary&, const BoxplotSummary&) = default;
};

struct Heatmap {
  std::vector<std::string> problems;  // rows, lexicographic
  std::vector<double> temperatures;   // columns, ascending
  std::vector<std::vector<std::optional<double>>> success_rate_pct;

  friend bool operator==(const Heatmap&, const Heatmap&) = default;
};

struct RunMetadata {
  Json plan;
  std::string cassette_digest;
  std::string corpus_digest;
  double low_threshold = metrics::kDefaultLowThreshold;

  friend bool operator==(const RunMetadata&, const RunMetadata&) = default;
};

struct RunReport {
  RunMetadata metadata;
  std::vector<StabilityRow> stability_rows;
  std::vector<OERRow> oer_rows;
  std::map<double, double> general_oer;
  std::map<double, CategoryCounts> category_distribution;
  Heatmap heatmap;
  std::vector<BoxplotSummary> similarity_boxplot;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

/// One row per (problem, temperature) group of candidates, sorted.
std::vector<StabilityRow> build_stability_rows(std::span<const PatchCandidate> candidates,
                                               double low_threshold = metrics::kDefaultLowThreshold);

/// One row per (problem, temperature) group of trials, sorted.
std::vector<OERRow> build_oer_rows(std::span<const TrialResult> trials);

/// Unweighted mean of the row means at `temperature`. InvalidArgumentError
/// when no row has that temperature.
double general_oer(std::span<const OERRow> rows, double temperature);

/// Pooled successes / trials at `temperature`.
double pooled_success_fraction(std::span<const OERRow> rows, double temperature);

std::map<double, CategoryCounts> category_distribution(std::span<const OERRow> rows);
Heatmap build_heatmap(std::span<const OERRow> rows);
std::vector<BoxplotSummary> similarity_boxplot(std::span<const StabilityRow> rows);

/// Assembles every aggregate and checks the uniform-count identity
/// general_oer == pooled success fraction (InvalidArgumentError if violated).
RunReport build_report(std::span<const PatchCandidate> candidates,
                       std::span<const TrialResult> trials, RunMetadata metadata);

Json to_json(const RunReport& report);
RunReport run_report_from_json(const Json& j);

/// Canonical serialized form of report.json (indented, trailing LF).
std::string render_report_json(const RunReport& report);

inline constexpr const char* kStabilityCsvHeader =
    "problem,temperature,average_similarity,variance,maximum_similarity,minimum_similarity,"
    "standard_deviation,low_similarity_ratio";
inline constexpr const char* kOerCsvHeader =
    "problem,temperature,count,successes,failures,mean,variance,stddev,success_rate_pct,category";

/// `display` rounds reals to two decimals; otherwise full precision.
std::string render_stability_csv(std::span<const StabilityRow> rows, bool display);
std::string render_oer_csv(std::span<const OERRow> rows, bool display);

enum class ReportFormat { kCsv, kJson };
ReportFormat report_format_from_string(std::string_view text);

/// Writes stability.csv, oer.csv and their *_display.csv twins (csv) or
/// report.json (json) into `dest_dir`. Returns the written paths.
std::vector<std::filesystem::path> export_report(const RunReport& report, ReportFormat format,
                                                 const std::filesystem::path& dest_dir,
                                                 std::ostream& diagnostics);

/// Fill colour for a success rate on the 0% / 50% / 100% linear scale.
std::string heatmap_color(double success_rate_pct);

std::string render_heatmap_svg(const RunReport& report);
std::filesystem::path emit_heatmap_svg(const RunReport& report, const std::filesystem::path& dest);

}  // namespace patchgate::analysis
