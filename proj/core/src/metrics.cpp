#include "patchgate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "patchgate/errors.hpp"

namespace patchgate::metrics {

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char lead = byte(i);
    std::size_t len = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
      len = 1;
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      len = 2;
      cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3;
      cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4;
      cp = lead & 0x07;
    }
    bool ok = len != 0 && i + len <= text.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const unsigned char cont = byte(i + k);
      if ((cont & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (cont & 0x3F);
      }
    }
    // Reject overlong forms and surrogates so decoding stays one-to-one.
    if (ok && ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
               (len == 4 && (cp < 0x10000 || cp > 0x10FFFF)) || (cp >= 0xD800 && cp <= 0xDFFF))) {
      ok = false;
    }
    if (ok) {
      out.push_back(cp);
      i += len;
    } else {
      out.push_back(static_cast<char32_t>(0xDC00 + lead));
      i += 1;
    }
  }
  return out;
}

std::size_t levenshtein_distance(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  if (b.empty()) return a.size();
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t above = row[j];
      const std::size_t substitution = diagonal + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({above + 1, row[j - 1] + 1, substitution});
      diagonal = above;
    }
  }
  return row[b.size()];
}

std::size_t levenshtein_distance(std::string_view a, std::string_view b) {
  return levenshtein_distance(std::u32string_view(decode_utf8(a)),
                              std::u32string_view(decode_utf8(b)));
}

double levenshtein_similarity(std::string_view a, std::string_view b) {
  const std::u32string ua = decode_utf8(a);
  const std::u32string ub = decode_utf8(b);
  const std::size_t longest = std::max(ua.size(), ub.size());
  if (longest == 0) return 1.0;
  const std::size_t d = levenshtein_distance(std::u32string_view(ua), std::u32string_view(ub));
  return 1.0 - static_cast<double>(d) / static_cast<double>(longest);
}

SimilarityStats summarize_similarities(std::vector<double> similarities, double low_threshold) {
  if (similarities.empty()) {
    throw UndefinedStatisticError("similarity statistics need at least one pair");
  }
  std::sort(similarities.begin(), similarities.end());
  const std::size_t n = similarities.size();

  SimilarityStats s;
  s.pair_count = n;
  s.min = similarities.front();
  s.max = similarities.back();
  double sum = 0.0;
  std::size_t low = 0;
  for (double v : similarities) {
    sum += v;
    if (v < low_threshold) ++low;
  }
  s.mean = std::clamp(sum / static_cast<double>(n), s.min, s.max);
  if (n > 1) {
    double squares = 0.0;
    for (double v : similarities) squares += (v - s.mean) * (v - s.mean);
    s.variance = squares / static_cast<double>(n - 1);
  }
  s.stddev = std::sqrt(s.variance);
  s.low_ratio = static_cast<double>(low) / static_cast<double>(n);
  return s;
}

SimilarityStats pairwise_similarity_stats(std::span<const std::string> texts, double low_threshold) {
  if (texts.size() < 2) {
    throw UndefinedStatisticError(
        fmt::format("pairwise similarity needs at least 2 texts, got {}", texts.size()));
  }
  std::vector<double> sims;
  sims.reserve(texts.size() * (texts.size() - 1) / 2);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    for (std::size_t j = i + 1; j < texts.size(); ++j) {
      sims.push_back(levenshtein_similarity(texts[i], texts[j]));
    }
  }
  return summarize_similarities(std::move(sims), low_threshold);
}

double oer(const OutcomeVector& p, const OutcomeVector& q) {
  if (p.size() != q.size()) {
    throw InvalidArgumentError(
        fmt::format("OER needs equal-length outcome vectors ({} vs {})", p.size(), q.size()));
  }
  if (p.empty()) throw InvalidArgumentError("OER is undefined on an empty test set");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (outcomes_equivalent(p[i], q[i])) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(p.size());
}

std::string_view to_string(SuccessCategory category) noexcept {
  switch (category) {
    case SuccessCategory::kFullySuccessful: return "Fully Successful";
    case SuccessCategory::kPartiallySuccessful: return "Partially Successful";
    case SuccessCategory::kFailed: return "Failed";
  }
  return "Failed";
}

SuccessCategory success_category_from_string(std::string_view text) {
  if (text == "Fully Successful") return SuccessCategory::kFullySuccessful;
  if (text == "Partially Successful") return SuccessCategory::kPartiallySuccessful;
  if (text == "Failed") return SuccessCategory::kFailed;
  throw ParseError(fmt::format("unknown success category '{}'", text));
}

namespace {

void check_counts(std::size_t successes, std::size_t count) {
  if (count == 0) throw InvalidArgumentError("trial count must be positive");
  if (successes > count) {
    throw InvalidArgumentError(
        fmt::format("successes ({}) exceed trial count ({})", successes, count));
  }
}

}  // namespace

SuccessCategory categorize(std::size_t successes, std::size_t count) {
  check_counts(successes, count);
  if (successes == count) return SuccessCategory::kFullySuccessful;
  const std::size_t majority = (count + 1) / 2;  // ceil(count / 2)
  if (successes >= majority) return SuccessCategory::kPartiallySuccessful;
  return SuccessCategory::kFailed;
}

SuccessStats success_stats(std::size_t successes, std::size_t count) {
  check_counts(successes, count);
  const double n = static_cast<double>(count);
  SuccessStats s;
  s.mean = static_cast<double>(successes) / n;
  if (count > 1) {
    const double ones = static_cast<double>(successes) * (1.0 - s.mean) * (1.0 - s.mean);
    const double zeros = static_cast<double>(count - successes) * s.mean * s.mean;
    s.variance = (ones + zeros) / (n - 1.0);
  }
  s.stddev = std::sqrt(s.variance);
  return s;
}

}  // namespace patchgate::metrics
