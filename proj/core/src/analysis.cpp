#include "patchgate/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "patchgate/errors.hpp"

namespace patchgate::analysis {

namespace {

using GroupKey = std::pair<std::string, double>;

}  // namespace

std::vector<StabilityRow> build_stability_rows(std::span<const PatchCandidate> candidates,
                                               double low_threshold) {
  std::map<GroupKey, std::vector<std::string>> groups;
  for (const auto& c : candidates) groups[{c.problem_name, c.temperature}].push_back(c.extracted_code);

  std::vector<StabilityRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, texts] : groups) {
    StabilityRow row{key.first, key.second, texts.size(), std::nullopt};
    if (texts.size() >= 2) row.stats = metrics::pairwise_similarity_stats(texts, low_threshold);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<OERRow> build_oer_rows(std::span<const TrialResult> trials) {
  std::map<GroupKey, std::pair<std::size_t, std::size_t>> groups;  // (count, successes)
  for (const auto& t : trials) {
    auto& [count, successes] = groups[{t.candidate.problem, t.candidate.temperature}];
    ++count;
    if (t.pass_all) ++successes;
  }
  std::vector<OERRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, counts] : groups) {
    const auto [count, successes] = counts;
    const auto stats = metrics::success_stats(successes, count);
    OERRow row;
    row.problem = key.first;
    row.temperature = key.second;
    row.count = count;
    row.successes = successes;
    row.failures = count - successes;
    row.mean = stats.mean;
    row.variance = stats.variance;
    row.stddev = stats.stddev;
    row.success_rate_pct = 100.0 * stats.mean;
    row.category = metrics::categorize(successes, count);
    rows.push_back(std::move(row));
  }
  return rows;
}

double general_oer(std::span<const OERRow> rows, double temperature) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.temperature != temperature) continue;
    sum += r.mean;
    ++n;
  }
  if (n == 0) throw InvalidArgumentError(fmt::format("no OER rows at temperature {}", temperature));
  return sum / static_cast<double>(n);
}

double pooled_success_fraction(std::span<const OERRow> rows, double temperature) {
  std::size_t successes = 0;
  std::size_t trials = 0;
  for (const auto& r : rows) {
    if (r.temperature != temperature) continue;
    successes += r.successes;
    trials += r.count;
  }
  if (trials == 0) throw InvalidArgumentError(fmt::format("no trials at temperature {}", temperature));
  return static_cast<double>(successes) / static_cast<double>(trials);
}

std::map<double, CategoryCounts> category_distribution(std::span<const OERRow> rows) {
  std::map<double, CategoryCounts> out;
  for (const auto& r : rows) {
    auto& c = out[r.temperature];
    switch (r.category) {
      case metrics::SuccessCategory::kFullySuccessful: ++c.fully; break;
      case metrics::SuccessCategory::kPartiallySuccessful: ++c.partially; break;
      case metrics::SuccessCategory::kFailed: ++c.failed; break;
    }
  }
  return out;
}

Heatmap build_heatmap(std::span<const OERRow> rows) {
  std::set<std::string> problems;
  std::set<double> temps;
  for (const auto& r : rows) {
    problems.insert(r.problem);
    temps.insert(r.temperature);
  }
  Heatmap h;
  h.problems.assign(problems.begin(), problems.end());
  h.temperatures.assign(temps.begin(), temps.end());
  h.success_rate_pct.assign(h.problems.size(), std::vector<std::optional<double>>(h.temperatures.size()));
  for (const auto& r : rows) {
    const auto row = static_cast<std::size_t>(
        std::lower_bound(h.problems.begin(), h.problems.end(), r.problem) - h.problems.begin());
    const auto col = static_cast<std::size_t>(
        std::lower_bound(h.temperatures.begin(), h.temperatures.end(), r.temperature) - h.temperatures.begin());
    h.success_rate_pct[row][col] = r.success_rate_pct;
  }
  return h;
}

namespace {

// Linear interpolation between closest ranks (numpy's default).
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace

std::vector<BoxplotSummary> similarity_boxplot(std::span<const StabilityRow> rows) {
  std::map<double, std::vector<double>> by_temp;
  for (const auto& r : rows) {
    if (r.stats) by_temp[r.temperature].push_back(r.stats->mean);
  }
  std::vector<BoxplotSummary> out;
  for (auto& [t, values] : by_temp) {
    std::sort(values.begin(), values.end());
    out.push_back({t, values.size(), values.front(), quantile(values, 0.25), quantile(values, 0.5),
                   quantile(values, 0.75), values.back()});
  }
  return out;
}

RunReport build_report(std::span<const PatchCandidate> candidates, std::span<const TrialResult> trials,
                       RunMetadata metadata) {
  RunReport report;
  report.stability_rows = build_stability_rows(candidates, metadata.low_threshold);
  report.metadata = std::move(metadata);
  report.oer_rows = build_oer_rows(trials);
  report.category_distribution = category_distribution(report.oer_rows);
  report.heatmap = build_heatmap(report.oer_rows);
  report.similarity_boxplot = similarity_boxplot(report.stability_rows);

  for (double t : report.heatmap.temperatures) {
    const double g = general_oer(report.oer_rows, t);
    report.general_oer[t] = g;

    std::set<std::size_t> counts;
    for (const auto& r : report.oer_rows) {
      if (r.temperature == t) counts.insert(r.count);
    }
    if (counts.size() == 1) {
      const double pooled = pooled_success_fraction(report.oer_rows, t);
      if (std::fabs(g - pooled) > 1e-12) {
        throw InvalidArgumentError(fmt::format(
            "general OER {} disagrees with pooled success fraction {} at temperature {}", g, pooled, t));
      }
    }
  }
  return report;
}

}  // namespace patchgate::analysis
