#pragma once

// Edit-distance similarity, dispersion statistics, output equivalence and
// trial success summaries. Everything here is pure and thread-safe.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "patchgate/outcome.hpp"

namespace patchgate::metrics {

inline constexpr double kDefaultLowThreshold = 0.7;

/// Decodes UTF-8 into code points; bytes that are not part of a valid
/// sequence are mapped one-to-one into U+DC80..U+DCFF so every input has a
/// lossless decoding.
std::u32string decode_utf8(std::string_view text);

/// Two-row Levenshtein DP with unit insertion, deletion and substitution cost
/// (substitution costs 0 on equal symbols).
std::size_t levenshtein_distance(std::u32string_view a, std::u32string_view b);

/// Levenshtein distance over Unicode code points of two UTF-8 strings.
std::size_t levenshtein_distance(std::string_view a, std::string_view b);

/// 1 - d(a,b) / max(|a|,|b|), lengths in code points; 1.0 for two empty strings.
double levenshtein_similarity(std::string_view a, std::string_view b);

struct SimilarityStats {
  double mean = 0.0;
  double variance = 0.0;  // unbiased, over pairs
  double stddev = 0.0;
  double max = 0.0;
  double min = 0.0;
  double low_ratio = 0.0;  // fraction of pairs strictly below the threshold
  std::size_t pair_count = 0;

  friend bool operator==(const SimilarityStats&, const SimilarityStats&) = default;
};

/// Dispersion summary over the given pairwise similarity values. The values
/// are sorted before accumulation so the result does not depend on order.
SimilarityStats summarize_similarities(std::vector<double> similarities,
                                       double low_threshold = kDefaultLowThreshold);

/// Similarity over all C(n,2) unordered pairs of `texts`.
/// Throws UndefinedStatisticError for fewer than two texts.
SimilarityStats pairwise_similarity_stats(std::span<const std::string> texts,
                                          double low_threshold = kDefaultLowThreshold);

/// Output Equivalence Rate: fraction of positions where the two vectors hold
/// equivalent outcomes. Throws InvalidArgumentError on length mismatch or
/// an empty test set.
double oer(const OutcomeVector& p, const OutcomeVector& q);

enum class SuccessCategory { kFullySuccessful, kPartiallySuccessful, kFailed };

std::string_view to_string(SuccessCategory category) noexcept;  // "Fully Successful", ...
SuccessCategory success_category_from_string(std::string_view text);

/// Fully: every trial passed. Partially: a majority (>= ceil(count/2)) but not
/// all. Failed: otherwise. Throws InvalidArgumentError if successes > count
/// or count == 0.
SuccessCategory categorize(std::size_t successes, std::size_t count);

struct SuccessStats {
  double mean = 0.0;
  double variance = 0.0;  // unbiased over the 0/1 trial values
  double stddev = 0.0;
};

SuccessStats success_stats(std::size_t successes, std::size_t count);

}  // namespace patchgate::metrics
