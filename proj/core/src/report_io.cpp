#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "patchgate/analysis.hpp"
#include "patchgate/errors.hpp"
#include "patchgate/text.hpp"

namespace patchgate::analysis {

namespace {

Json stats_to_json(const StabilityRow& r) {
  Json j{{"problem", r.problem},
         {"temperature", r.temperature},
         {"candidate_count", r.candidate_count},
         {"insufficient", r.insufficient()}};
  if (r.stats) {
    const auto& s = *r.stats;
    j["average_similarity"] = s.mean;
    j["variance"] = s.variance;
    j["maximum_similarity"] = s.max;
    j["minimum_similarity"] = s.min;
    j["standard_deviation"] = s.stddev;
    j["low_similarity_ratio"] = s.low_ratio;
    j["pair_count"] = s.pair_count;
  }
  return j;
}

StabilityRow stability_row_from_json(const Json& j) {
  StabilityRow r;
  r.problem = j.at("problem").get<std::string>();
  r.temperature = j.at("temperature").get<double>();
  r.candidate_count = j.at("candidate_count").get<std::size_t>();
  if (!j.at("insufficient").get<bool>()) {
    metrics::SimilarityStats s;
    s.mean = j.at("average_similarity").get<double>();
    s.variance = j.at("variance").get<double>();
    s.max = j.at("maximum_similarity").get<double>();
    s.min = j.at("minimum_similarity").get<double>();
    s.stddev = j.at("standard_deviation").get<double>();
    s.low_ratio = j.at("low_similarity_ratio").get<double>();
    s.pair_count = j.at("pair_count").get<std::size_t>();
    r.stats = s;
  }
  return r;
}

Json oer_to_json(const OERRow& r) {
  return Json{{"problem", r.problem},
              {"temperature", r.temperature},
              {"count", r.count},
              {"successes", r.successes},
              {"failures", r.failures},
              {"mean", r.mean},
              {"variance", r.variance},
              {"stddev", r.stddev},
              {"success_rate_pct", r.success_rate_pct},
              {"category", std::string(metrics::to_string(r.category))}};
}

OERRow oer_row_from_json(const Json& j) {
  OERRow r;
  r.problem = j.at("problem").get<std::string>();
  r.temperature = j.at("temperature").get<double>();
  r.count = j.at("count").get<std::size_t>();
  r.successes = j.at("successes").get<std::size_t>();
  r.failures = j.at("failures").get<std::size_t>();
  r.mean = j.at("mean").get<double>();
  r.variance = j.at("variance").get<double>();
  r.stddev = j.at("stddev").get<double>();
  r.success_rate_pct = j.at("success_rate_pct").get<double>();
  r.category = metrics::success_category_from_string(j.at("category").get<std::string>());
  return r;
}

// Per-temperature maps are keyed by the temperature label; each entry also
// carries the exact temperature so parsing never depends on the label.
template <typename T, typename F>
Json temperature_map(const std::map<double, T>& m, F&& value_json) {
  Json out = Json::array();
  for (const auto& [t, v] : m) {
    Json entry{{"temperature", t}, {"label", temperature_label(t)}};
    value_json(entry, v);
    out.push_back(std::move(entry));
  }
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string num(double v, bool display) { return display ? format_display(v) : format_full(v); }

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

Json to_json(const RunReport& report) {
  Json j;
  j["metadata"] = Json{{"plan", report.metadata.plan},
                       {"cassette_digest", report.metadata.cassette_digest},
                       {"corpus_digest", report.metadata.corpus_digest},
                       {"low_threshold", report.metadata.low_threshold}};
  j["stability"] = Json::array();
  for (const auto& r : report.stability_rows) j["stability"].push_back(stats_to_json(r));
  j["oer"] = Json::array();
  for (const auto& r : report.oer_rows) j["oer"].push_back(oer_to_json(r));
  j["general_oer"] = temperature_map(report.general_oer, [](Json& e, double v) { e["value"] = v; });
  j["category_distribution"] =
      temperature_map(report.category_distribution, [](Json& e, const CategoryCounts& c) {
        e["fully"] = c.fully;
        e["partially"] = c.partially;
        e["failed"] = c.failed;
      });

  Json matrix = Json::array();
  for (const auto& row : report.heatmap.success_rate_pct) {
    Json jr = Json::array();
    for (const auto& cell : row) jr.push_back(cell ? Json(*cell) : Json(nullptr));
    matrix.push_back(std::move(jr));
  }
  j["heatmap"] = Json{{"problems", report.heatmap.problems},
                      {"temperatures", report.heatmap.temperatures},
                      {"success_rate_pct", std::move(matrix)}};

  j["similarity_boxplot"] = Json::array();
  for (const auto& b : report.similarity_boxplot) {
    j["similarity_boxplot"].push_back(Json{{"temperature", b.temperature},
                                           {"n", b.n},
                                           {"min", b.min},
                                           {"q1", b.q1},
                                           {"median", b.median},
                                           {"q3", b.q3},
                                           {"max", b.max}});
  }
  return j;
}

RunReport run_report_from_json(const Json& j) {
  try {
    RunReport r;
    const auto& m = j.at("metadata");
    r.metadata.plan = m.at("plan");
    r.metadata.cassette_digest = m.at("cassette_digest").get<std::string>();
    r.metadata.corpus_digest = m.at("corpus_digest").get<std::string>();
    r.metadata.low_threshold = m.at("low_threshold").get<double>();
    for (const auto& e : j.at("stability")) r.stability_rows.push_back(stability_row_from_json(e));
    for (const auto& e : j.at("oer")) r.oer_rows.push_back(oer_row_from_json(e));
    for (const auto& e : j.at("general_oer")) {
      r.general_oer[e.at("temperature").get<double>()] = e.at("value").get<double>();
    }
    for (const auto& e : j.at("category_distribution")) {
      r.category_distribution[e.at("temperature").get<double>()] =
          CategoryCounts{e.at("fully").get<std::size_t>(), e.at("partially").get<std::size_t>(),
                         e.at("failed").get<std::size_t>()};
    }
    const auto& h = j.at("heatmap");
    r.heatmap.problems = h.at("problems").get<std::vector<std::string>>();
    r.heatmap.temperatures = h.at("temperatures").get<std::vector<double>>();
    for (const auto& row : h.at("success_rate_pct")) {
      std::vector<std::optional<double>> cells;
      for (const auto& c : row) {
        cells.push_back(c.is_null() ? std::nullopt : std::optional<double>(c.get<double>()));
      }
      r.heatmap.success_rate_pct.push_back(std::move(cells));
    }
    for (const auto& b : j.at("similarity_boxplot")) {
      r.similarity_boxplot.push_back({b.at("temperature").get<double>(), b.at("n").get<std::size_t>(),
                                      b.at("min").get<double>(), b.at("q1").get<double>(),
                                      b.at("median").get<double>(), b.at("q3").get<double>(),
                                      b.at("max").get<double>()});
    }
    return r;
  } catch (const Json::exception& e) {
    throw ParseError(fmt::format("malformed report: {}", e.what()));
  }
}

std::string render_report_json(const RunReport& report) { return to_json(report).dump(2) + "\n"; }

std::string render_stability_csv(std::span<const StabilityRow> rows, bool display) {
  std::string out = kStabilityCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += csv_field(r.problem) + ',' + temperature_label(r.temperature);
    if (r.stats) {
      const auto& s = *r.stats;
      for (double v : {s.mean, s.variance, s.max, s.min, s.stddev, s.low_ratio}) out += ',' + num(v, display);
    } else {
      out += ",,,,,,";
    }
    out += '\n';
  }
  return out;
}

std::string render_oer_csv(std::span<const OERRow> rows, bool display) {
  std::string out = kOerCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", csv_field(r.problem),
                       temperature_label(r.temperature), r.count, r.successes, r.failures,
                       num(r.mean, display), num(r.variance, display), num(r.stddev, display),
                       num(r.success_rate_pct, display), csv_field(metrics::to_string(r.category)));
  }
  return out;
}

ReportFormat report_format_from_string(std::string_view text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  throw ConfigError(fmt::format("unknown report format '{}' (expected csv or json)", text));
}

std::vector<std::filesystem::path> export_report(const RunReport& report, ReportFormat format,
                                                 const std::filesystem::path& dest_dir,
                                                 std::ostream& diagnostics) {
  std::error_code ec;
  std::filesystem::create_directories(dest_dir, ec);
  if (ec) throw IOError(fmt::format("cannot create {}: {}", dest_dir.string(), ec.message()));

  std::vector<std::filesystem::path> written;
  auto emit = [&](const char* name, const std::string& contents) {
    auto path = dest_dir / name;
    write_file_atomic(path.string(), contents);
    written.push_back(std::move(path));
  };

  if (format == ReportFormat::kJson) {
    emit("report.json", render_report_json(report));
    return written;
  }
  if (report.stability_rows.empty()) diagnostics << "warning: no stability rows; stability.csv has a header only\n";
  if (report.oer_rows.empty()) diagnostics << "warning: no OER rows; oer.csv has a header only\n";
  emit("stability.csv", render_stability_csv(report.stability_rows, false));
  emit("stability_display.csv", render_stability_csv(report.stability_rows, true));
  emit("oer.csv", render_oer_csv(report.oer_rows, false));
  emit("oer_display.csv", render_oer_csv(report.oer_rows, true));
  return written;
}

namespace {

struct Rgb {
  int r, g, b;
};

// 0% red, 50% yellow, 100% green.
constexpr std::array<std::pair<double, Rgb>, 3> kColorStops{{
    {0.0, {0xd7, 0x30, 0x27}},
    {50.0, {0xfe, 0xe0, 0x8b}},
    {100.0, {0x1a, 0x98, 0x50}},
}};

constexpr const char* kMissingColor = "#bdbdbd";

}  // namespace

std::string heatmap_color(double pct) {
  if (!std::isfinite(pct)) return kMissingColor;
  pct = std::clamp(pct, 0.0, 100.0);
  std::size_t i = pct <= kColorStops[1].first ? 0 : 1;
  const auto& [x0, c0] = kColorStops[i];
  const auto& [x1, c1] = kColorStops[i + 1];
  const double f = (pct - x0) / (x1 - x0);
  auto mix = [f](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * f)); };
  return fmt::format("#{:02x}{:02x}{:02x}", mix(c0.r, c1.r), mix(c0.g, c1.g), mix(c0.b, c1.b));
}

std::string render_heatmap_svg(const RunReport& report) {
  const auto& h = report.heatmap;
  constexpr int kLabelWidth = 200;
  constexpr int kTop = 60;
  constexpr int kCellW = 90;
  constexpr int kCellH = 24;
  constexpr int kLegendH = 50;
  const int width = kLabelWidth + kCellW * static_cast<int>(h.temperatures.size()) + 20;
  const int height = kTop + kCellH * static_cast<int>(h.problems.size()) + kLegendH;

  std::string out;
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      width, height);
  out += "<title>Success rate per problem and temperature</title>\n";
  out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", width, height);
  out += fmt::format("<text x=\"{}\" y=\"20\" font-size=\"14\" font-weight=\"bold\">Success rate (%) by problem and temperature</text>\n",
                     kLabelWidth / 2);

  for (std::size_t c = 0; c < h.temperatures.size(); ++c) {
    const int x = kLabelWidth + static_cast<int>(c) * kCellW + kCellW / 2;
    out += fmt::format("<text class=\"col\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">T={}</text>\n", x,
                       kTop - 8, temperature_label(h.temperatures[c]));
  }
  for (std::size_t r = 0; r < h.problems.size(); ++r) {
    const int y = kTop + static_cast<int>(r) * kCellH;
    out += fmt::format("<text class=\"row\" x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
                       kLabelWidth - 8, y + kCellH / 2 + 4, xml_escape(h.problems[r]));
    for (std::size_t c = 0; c < h.temperatures.size(); ++c) {
      const int x = kLabelWidth + static_cast<int>(c) * kCellW;
      const auto& cell = h.success_rate_pct[r][c];
      const std::string fill = cell ? heatmap_color(*cell) : kMissingColor;
      const std::string label = cell ? format_display(*cell) : "n/a";
      out += fmt::format(
          "<rect class=\"cell\" data-problem=\"{}\" data-temperature=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" "
          "height=\"{}\" fill=\"{}\" stroke=\"#ffffff\"/>\n",
          xml_escape(h.problems[r]), temperature_label(h.temperatures[c]), x, y, kCellW, kCellH, fill);
      out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", x + kCellW / 2,
                         y + kCellH / 2 + 4, label);
    }
  }

  const int ly = kTop + kCellH * static_cast<int>(h.problems.size()) + 15;
  out += "<defs><linearGradient id=\"scale\">";
  for (const auto& [pct, c] : kColorStops) {
    out += fmt::format("<stop offset=\"{}%\" stop-color=\"#{:02x}{:02x}{:02x}\"/>", pct, c.r, c.g, c.b);
  }
  out += "</linearGradient></defs>\n";
  out += fmt::format("<rect class=\"legend\" x=\"{}\" y=\"{}\" width=\"180\" height=\"12\" fill=\"url(#scale)\"/>\n",
                     kLabelWidth, ly);
  out += fmt::format("<text x=\"{}\" y=\"{}\">0%</text>\n", kLabelWidth, ly + 26);
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">100%</text>\n", kLabelWidth + 180, ly + 26);
  out += "</svg>\n";
  return out;
}

std::filesystem::path emit_heatmap_svg(const RunReport& report, const std::filesystem::path& dest) {
  write_file_atomic(dest.string(), render_heatmap_svg(report));
  return dest;
}

}  // namespace patchgate::analysis
