#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "levenshtein_oracle.hpp"
#include "patchgate/errors.hpp"
#include "patchgate/metrics.hpp"
#include "patchgate/text.hpp"

using namespace patchgate;
using namespace patchgate::metrics;
using patchgate::testing::enumerate_strings;
using patchgate::testing::full_table_levenshtein;
using patchgate::testing::oracle_similarity;

namespace {

std::string random_string(std::mt19937_64& rng, const std::string& alphabet, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s(len(rng), ' ');
  for (auto& c : s) c = alphabet[pick(rng)];
  return s;
}

}  // namespace

TEST(Levenshtein, Examples) {
  EXPECT_EQ(levenshtein_distance("abc", "abc"), 0u);
  EXPECT_EQ(levenshtein_distance("", "abc"), 3u);
  EXPECT_EQ(levenshtein_distance("kitten", "sitting"), 3u);
  EXPECT_EQ(full_table_levenshtein(std::string("kitten"), std::string("sitting")), 3u);
  EXPECT_EQ(levenshtein_distance("", ""), 0u);
}

TEST(Levenshtein, SimilarityExamples) {
  EXPECT_DOUBLE_EQ(levenshtein_similarity("xyz", "xyz"), 1.0);
  EXPECT_DOUBLE_EQ(levenshtein_similarity("abc", ""), 0.0);
  EXPECT_DOUBLE_EQ(levenshtein_similarity("", ""), 1.0);
  EXPECT_NEAR(levenshtein_similarity("kitten", "sitting"), 1.0 - 3.0 / 7.0, 1e-15);
  EXPECT_EQ(format_display(levenshtein_similarity("kitten", "sitting")), "0.57");
}

TEST(Levenshtein, CountsCodePointsNotBytes) {
  // "é" is two bytes; one substitution either way.
  EXPECT_EQ(levenshtein_distance("caf\xc3\xa9", "cafe"), 1u);
  EXPECT_DOUBLE_EQ(levenshtein_similarity("caf\xc3\xa9", "cafe"), 0.75);
  EXPECT_EQ(levenshtein_distance("\xe2\x82\xac", "\xc2\xa3"), 1u);  // euro vs pound
}

TEST(Levenshtein, InvalidUtf8IsLossless) {
  const std::string bad = "a\xff" "b";
  EXPECT_EQ(decode_utf8(bad).size(), 3u);
  EXPECT_EQ(levenshtein_distance(bad, "a\xfe" "b"), 1u);
  EXPECT_EQ(levenshtein_distance(bad, bad), 0u);
}

TEST(Levenshtein, MatchesOracleExhaustivelySmall) {
  const auto strings = enumerate_strings("abc", 4);
  for (const auto& a : strings) {
    for (const auto& b : strings) {
      ASSERT_EQ(levenshtein_distance(a, b), full_table_levenshtein(a, b)) << a << " / " << b;
    }
  }
}

TEST(Levenshtein, MatchesOracleRandomUpTo12) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 5000; ++i) {
    const auto a = random_string(rng, "abc", 12);
    const auto b = random_string(rng, "abc", 12);
    ASSERT_EQ(levenshtein_distance(a, b), full_table_levenshtein(a, b)) << a << " / " << b;
    ASSERT_DOUBLE_EQ(levenshtein_similarity(a, b), oracle_similarity(a, b));
  }
}

TEST(Levenshtein, MetricAxioms) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 3000; ++i) {
    const auto a = random_string(rng, "abcd", 10);
    const auto b = random_string(rng, "abcd", 10);
    const auto c = random_string(rng, "abcd", 10);
    const auto ab = levenshtein_distance(a, b);
    ASSERT_EQ(ab, levenshtein_distance(b, a));
    ASSERT_EQ(ab == 0, a == b);
    ASSERT_LE(levenshtein_distance(a, c), ab + levenshtein_distance(b, c));
    const auto lo = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
    ASSERT_GE(ab, lo);
    ASSERT_LE(ab, std::max(a.size(), b.size()));
    const double s = levenshtein_similarity(a, b);
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 1.0);
    ASSERT_EQ(s == 1.0, a == b);
  }
}

TEST(SimilarityStats, IdenticalTexts) {
  const std::vector<std::string> texts(3, "def f(): pass");
  const auto s = pairwise_similarity_stats(texts);
  EXPECT_DOUBLE_EQ(s.mean, 1.0);
  EXPECT_DOUBLE_EQ(s.variance, 0.0);
  EXPECT_DOUBLE_EQ(s.low_ratio, 0.0);
  EXPECT_EQ(s.pair_count, 3u);
}

TEST(SimilarityStats, TwoEqualOneDisjoint) {
  // sim(A,B) = 0 so the pairs are {1, 0, 0}.
  const std::vector<std::string> texts{"aaa", "aaa", "bbb"};
  const auto s = pairwise_similarity_stats(texts);
  EXPECT_NEAR(s.mean, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.variance, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.stddev, std::sqrt(1.0 / 3.0), 1e-12);
  EXPECT_EQ(format_display(s.stddev), "0.58");
  EXPECT_NEAR(s.low_ratio, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.max, 1.0);
  EXPECT_DOUBLE_EQ(s.min, 0.0);
}

TEST(SimilarityStats, SinglePair) {
  const std::vector<std::string> texts{"ab", "ac"};
  const auto s = pairwise_similarity_stats(texts);
  EXPECT_DOUBLE_EQ(s.mean, 0.5);
  EXPECT_DOUBLE_EQ(s.variance, 0.0);
  EXPECT_EQ(s.pair_count, 1u);
  EXPECT_DOUBLE_EQ(s.low_ratio, 1.0);
}

TEST(SimilarityStats, ThresholdIsStrict) {
  // 0.7 exactly is not "low".
  const auto s = summarize_similarities({0.7, 0.69, 1.0});
  EXPECT_NEAR(s.low_ratio, 1.0 / 3.0, 1e-12);
}

TEST(SimilarityStats, FewerThanTwoTextsIsUndefined) {
  const std::vector<std::string> one{"x"};
  EXPECT_THROW(pairwise_similarity_stats(one), UndefinedStatisticError);
  EXPECT_THROW(pairwise_similarity_stats(std::vector<std::string>{}), UndefinedStatisticError);
}

TEST(SimilarityStats, InvariantsAndPermutationInvariance) {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 200; ++round) {
    std::uniform_int_distribution<int> n_dist(2, 7);
    std::vector<std::string> texts(static_cast<std::size_t>(n_dist(rng)));
    for (auto& t : texts) t = random_string(rng, "abxy", 14);
    const auto s = pairwise_similarity_stats(texts);
    const std::size_t n = texts.size();
    ASSERT_EQ(s.pair_count, n * (n - 1) / 2);
    ASSERT_LE(s.min, s.mean + 1e-15);
    ASSERT_LE(s.mean, s.max + 1e-15);
    ASSERT_NEAR(s.stddev * s.stddev, s.variance, 1e-9);
    const double k = s.low_ratio * static_cast<double>(s.pair_count);
    ASSERT_NEAR(k, std::round(k), 1e-9);
    for (int p = 0; p < 5; ++p) {
      std::shuffle(texts.begin(), texts.end(), rng);
      ASSERT_EQ(pairwise_similarity_stats(texts), s);
    }
  }
}

namespace {

OutcomeVector values(std::initializer_list<int> xs) {
  OutcomeVector v;
  for (int x : xs) v.push_back(CaseOutcome::of_value(x));
  return v;
}

}  // namespace

TEST(Oer, Examples) {
  EXPECT_DOUBLE_EQ(oer(values({1, 2, 3, 4}), values({1, 2, 3, 4})), 1.0);
  EXPECT_DOUBLE_EQ(oer(values({1, 2, 3, 4}), values({5, 6, 7, 8})), 0.0);
  EXPECT_DOUBLE_EQ(oer(values({1, 2, 3, 4}), values({1, 2, 3, 9})), 0.75);
}

TEST(Oer, FailuresNeverMatch) {
  const auto t = CaseOutcome::failure(OutcomeStatus::kTimeout, "");
  const auto e = CaseOutcome::failure(OutcomeStatus::kRuntimeError, "ValueError");
  const auto l = CaseOutcome::failure(OutcomeStatus::kLoadError, "SyntaxError");
  for (const auto& a : {t, e, l}) {
    for (const auto& b : {t, e, l, CaseOutcome::of_value(nullptr)}) {
      EXPECT_FALSE(outcomes_equivalent(a, b));
      EXPECT_FALSE(outcomes_equivalent(b, a));
    }
  }
  EXPECT_DOUBLE_EQ(oer({t, e}, {t, e}), 0.0);
}

TEST(Oer, Errors) {
  EXPECT_THROW(oer(values({1}), values({1, 2})), InvalidArgumentError);
  EXPECT_THROW(oer({}, {}), InvalidArgumentError);
}

TEST(Oer, SymmetricAndQuantized) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> v(0, 3);
  for (int round = 0; round < 500; ++round) {
    const std::size_t n = 1 + static_cast<std::size_t>(round % 9);
    OutcomeVector p, q;
    for (std::size_t i = 0; i < n; ++i) {
      auto draw = [&] {
        const int x = v(rng);
        return x == 3 ? CaseOutcome::failure(OutcomeStatus::kRuntimeError, "E") : CaseOutcome::of_value(x);
      };
      p.push_back(draw());
      q.push_back(draw());
    }
    const double r = oer(p, q);
    ASSERT_DOUBLE_EQ(r, oer(q, p));
    const double k = r * static_cast<double>(n);
    ASSERT_NEAR(k, std::round(k), 1e-9);
  }
  EXPECT_DOUBLE_EQ(oer(values({4, 5}), values({4, 5})), 1.0);
}

TEST(CompareValues, Tolerance) {
  EXPECT_TRUE(compare_values(1.0, 1.0 + 1e-7));
  EXPECT_FALSE(compare_values(1.0, 1.001));
  EXPECT_TRUE(compare_values(1e9, 1e9 + 100.0));
  EXPECT_TRUE(compare_values(2, 2.0));
  EXPECT_FALSE(compare_values(Json::parse("[1,2]"), Json::parse("[2,1]")));
  EXPECT_TRUE(compare_values(Json::parse(R"({"a":[1,2.0000001]})"), Json::parse(R"({"a":[1,2]})")));
  EXPECT_FALSE(compare_values(Json::parse(R"({"a":1})"), Json::parse(R"({"a":1,"b":2})")));
  EXPECT_FALSE(compare_values("1", 1));
  EXPECT_FALSE(compare_values(true, 1));
  EXPECT_TRUE(compare_values(nullptr, nullptr));
}

TEST(Categorize, Examples) {
  EXPECT_EQ(categorize(3, 3), SuccessCategory::kFullySuccessful);
  EXPECT_EQ(categorize(2, 3), SuccessCategory::kPartiallySuccessful);
  EXPECT_EQ(categorize(1, 3), SuccessCategory::kFailed);
  EXPECT_EQ(categorize(0, 3), SuccessCategory::kFailed);
  EXPECT_EQ(categorize(2, 4), SuccessCategory::kPartiallySuccessful);
  EXPECT_THROW(categorize(4, 3), InvalidArgumentError);
  EXPECT_THROW(categorize(0, 0), InvalidArgumentError);
}

TEST(Categorize, Monotone) {
  auto rank = [](SuccessCategory c) {
    return c == SuccessCategory::kFailed ? 0 : c == SuccessCategory::kPartiallySuccessful ? 1 : 2;
  };
  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::size_t s = 0; s < n; ++s) ASSERT_LE(rank(categorize(s, n)), rank(categorize(s + 1, n)));
  }
}

TEST(Categorize, StringRoundTrip) {
  for (auto c : {SuccessCategory::kFullySuccessful, SuccessCategory::kPartiallySuccessful, SuccessCategory::kFailed}) {
    EXPECT_EQ(success_category_from_string(to_string(c)), c);
  }
  EXPECT_EQ(to_string(SuccessCategory::kFullySuccessful), "Fully Successful");
  EXPECT_THROW(success_category_from_string("Mostly"), ParseError);
}

TEST(SuccessStats, TableRows) {
  auto display = [](const SuccessStats& s) {
    return format_display(s.mean) + " " + format_display(s.variance) + " " + format_display(s.stddev);
  };
  EXPECT_EQ(display(success_stats(2, 3)), "0.67 0.33 0.58");
  EXPECT_EQ(display(success_stats(3, 3)), "1.00 0.00 0.00");
  EXPECT_EQ(display(success_stats(0, 3)), "0.00 0.00 0.00");
  EXPECT_EQ(display(success_stats(1, 3)), "0.33 0.33 0.58");
}
