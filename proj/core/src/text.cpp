#include "patchgate/text.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "patchgate/errors.hpp"

namespace patchgate {

std::string normalize_newlines(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '\r') {
      out.push_back('\n');
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      out.push_back(ch);
    }
  }
  return out;
}

namespace {

std::string_view rtrim(std::string_view line) {
  while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\f' ||
                           line.back() == '\v')) {
    line.remove_suffix(1);
  }
  return line;
}

}  // namespace

std::string normalize_code(std::string_view text) {
  const std::string unified = normalize_newlines(text);
  std::vector<std::string_view> lines;
  std::string_view rest = unified;
  while (true) {
    const auto pos = rest.find('\n');
    lines.push_back(rtrim(rest.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  std::size_t first = 0;
  std::size_t last = lines.size();
  while (first < last && lines[first].empty()) ++first;
  while (last > first && lines[last - 1].empty()) --last;
  std::string out;
  for (std::size_t i = first; i < last; ++i) {
    if (i != first) out.push_back('\n');
    out.append(lines[i]);
  }
  return out;
}

std::string format_full(double value) {
  if (value == 0.0) return "0";  // folds -0
  return fmt::format("{}", value);
}

double round_display(double value) {
  // Nudge by a few ulps so values like 0.665 that print as x.xx5 round up.
  const double scaled = value * 100.0;
  const double nudged = scaled + std::copysign(1e-9 * std::max(1.0, std::fabs(scaled)), scaled);
  return std::round(nudged) / 100.0;
}

std::string format_display(double value) {
  const double rounded = round_display(value);
  return fmt::format("{:.2f}", rounded == 0.0 ? 0.0 : rounded);
}

std::string temperature_label(double temperature) {
  if (temperature == std::floor(temperature) && std::fabs(temperature) < 1e15) {
    return fmt::format("{:.1f}", temperature);
  }
  return fmt::format("{}", temperature);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError(fmt::format("cannot open '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IOError(fmt::format("cannot write '{}'", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IOError(fmt::format("short write to '{}'", tmp.string()));
  }
  fs::rename(tmp, target, ec);
  if (ec) throw IOError(fmt::format("cannot move '{}' into place: {}", tmp.string(), ec.message()));
}

}  // namespace patchgate
