#include <random>
#include <set>

#include <gtest/gtest.h>

#include "levenshtein_oracle.hpp"
#include "patchgate/errors.hpp"
#include "patchgate/gate.hpp"

using namespace patchgate;
using namespace patchgate::gate;

namespace {

struct Fixture {
  std::vector<PatchCandidate> candidates;
  std::vector<TrialResult> results;
};

Fixture make(const std::vector<std::pair<std::string, bool>>& trials, double temperature = 0.0) {
  Fixture f;
  for (std::size_t k = 0; k < trials.size(); ++k) {
    PatchCandidate c{"p", temperature, static_cast<int>(k), trials[k].first, trials[k].first, ""};
    TrialResult r;
    r.candidate = c.ref();
    r.pass_all = trials[k].second;
    f.candidates.push_back(c);
    f.results.push_back(r);
  }
  return f;
}

double total_similarity(std::size_t i, const std::vector<std::size_t>& members, const std::vector<std::string>& texts) {
  double s = 0.0;
  for (std::size_t m : members) {
    if (m != i) s += patchgate::testing::oracle_similarity(texts[i], texts[m]);
  }
  return s;
}

}  // namespace

TEST(Cluster, IdenticalPatchesFormOneCluster) {
  const std::vector<std::string> texts(3, "def f(): return 1");
  const auto c = cluster_texts(texts, 0.7);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_DOUBLE_EQ(c[0].cohesion, 1.0);
  EXPECT_EQ(c[0].members, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Cluster, TwoDisjointGroups) {
  // Within-group similarity 0.9, cross-group 0.2 (checked against the oracle).
  const std::vector<std::string> texts{"aaaaaaaaab", "bbbbbbbbaa", "aaaaaaaaac", "bbbbbbbbab"};
  using patchgate::testing::oracle_similarity;
  ASSERT_DOUBLE_EQ(oracle_similarity(texts[0], texts[2]), 0.9);
  ASSERT_DOUBLE_EQ(oracle_similarity(texts[1], texts[3]), 0.9);
  ASSERT_LE(oracle_similarity(texts[0], texts[1]), 0.2);
  const auto c = cluster_texts(texts, 0.7);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].members, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(c[1].members, (std::vector<std::size_t>{1, 3}));
  EXPECT_DOUBLE_EQ(c[0].cohesion, 0.9);
}

TEST(Cluster, ZeroThresholdGroupsEverything) {
  const std::vector<std::string> texts{"a", "zzzz", "", "qq"};
  const auto c = cluster_texts(texts, 0.0);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].members.size(), 4u);
}

TEST(Cluster, TauOutsideUnitIntervalIsRejected) {
  const std::vector<std::string> texts{"a"};
  EXPECT_THROW(cluster_texts(texts, 1.5), InvalidArgumentError);
}

TEST(Cluster, RandomSetsSatisfyPartitionAndMedoidProperties) {
  const std::vector<std::string> alphabet{"return a + b", "return a - b", "return b + a", "x = 1"};
  std::mt19937_64 rng(11);
  for (int round = 0; round < 2000; ++round) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<std::string> texts(n);
    for (auto& t : texts) t = alphabet[rng() % alphabet.size()] + std::string(rng() % 3, ' ');
    const double tau = static_cast<double>(rng() % 11) / 10.0;
    const auto clusters = cluster_texts(texts, tau);

    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (const auto& c : clusters) {
      total += c.members.size();
      seen.insert(c.members.begin(), c.members.end());
      ASSERT_NE(std::find(c.members.begin(), c.members.end(), c.representative), c.members.end());
      const double rep_total = total_similarity(c.representative, c.members, texts);
      for (std::size_t m : c.members) {
        ASSERT_GE(patchgate::testing::oracle_similarity(texts[c.representative], texts[m]), tau);
        ASSERT_GE(rep_total + 1e-12, total_similarity(m, c.members, texts));
      }
    }
    ASSERT_EQ(total, n);
    ASSERT_EQ(seen.size(), n);
    ASSERT_EQ(cluster_texts(texts, tau).size(), clusters.size());
  }
}

TEST(Cluster, PatchClustersUseScanOrder) {
  auto f = make({{"same", true}, {"same", true}});
  std::swap(f.candidates[0], f.candidates[1]);
  const auto c = cluster_patches(f.candidates, 0.7);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].members.front().trial_index, 0);
  EXPECT_EQ(c[0].representative.trial_index, 0);
}

TEST(Select, AllPassIdentical) {
  const auto f = make({{"fix", true}, {"fix", true}, {"fix", true}});
  for (auto policy : {SelectionPolicy::kMajority, SelectionPolicy::kFirstPassing, SelectionPolicy::kBestCluster}) {
    const auto s = select_patch(f.candidates, f.results, policy);
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(s->trial_index, 0);
  }
}

TEST(Select, MajorityNeedsStrictMajority) {
  const auto f = make({{"fix", true}, {"bad", false}, {"bad", false}});
  EXPECT_FALSE(select_patch(f.candidates, f.results, SelectionPolicy::kMajority).has_value());
  EXPECT_EQ(select_patch(f.candidates, f.results, SelectionPolicy::kFirstPassing)->trial_index, 0);
  const auto even = make({{"fix", true}, {"bad", false}});
  EXPECT_FALSE(select_patch(even.candidates, even.results, SelectionPolicy::kMajority).has_value());
}

TEST(Select, BestClusterPicksMedoidOfPassingPair) {
  // The two passing patches are at similarity 0.9.
  const auto f = make({{"def f(x): return x + 1", false}, {"abcdefghij", true}, {"abcdefghiz", true}});
  ASSERT_DOUBLE_EQ(patchgate::testing::oracle_similarity("abcdefghij", "abcdefghiz"), 0.9);
  const auto s = select_patch(f.candidates, f.results, SelectionPolicy::kBestCluster);
  ASSERT_TRUE(s.has_value());
  // Tied total similarity, so the earlier one is the medoid.
  EXPECT_EQ(s->trial_index, 1);
}

TEST(Select, MajorityPicksLargestPassingCluster) {
  const auto f = make({{"abcdefghij", true}, {"abcdefghij", true}, {"q", false}, {"r", false}, {"s", false}});
  EXPECT_FALSE(select_patch(f.candidates, f.results, SelectionPolicy::kMajority).has_value());
  const auto g = make({{"zzzzzzzzzz", true}, {"abcdefghij", true}, {"abcdefghij", true}, {"q", false}});
  EXPECT_EQ(select_patch(g.candidates, g.results, SelectionPolicy::kMajority)->trial_index, 1);
}

TEST(Select, NoPassingCandidate) {
  const auto f = make({{"a", false}, {"b", false}});
  for (auto policy : {SelectionPolicy::kMajority, SelectionPolicy::kFirstPassing, SelectionPolicy::kBestCluster}) {
    EXPECT_FALSE(select_patch(f.candidates, f.results, policy).has_value());
  }
}

TEST(Select, MismatchedInputs) {
  auto f = make({{"a", true}, {"b", true}});
  f.results.pop_back();
  EXPECT_THROW(select_patch(f.candidates, f.results, SelectionPolicy::kMajority), InvalidArgumentError);
}

TEST(Policy, Names) {
  for (auto p : {SelectionPolicy::kMajority, SelectionPolicy::kFirstPassing, SelectionPolicy::kBestCluster}) {
    EXPECT_EQ(selection_policy_from_string(to_string(p)), p);
  }
  EXPECT_THROW(selection_policy_from_string("random"), ConfigError);
}

TEST(Decide, Examples) {
  const auto all = make({{"fix", true}, {"fix", true}, {"fix", true}});
  const auto accept = decide(all.candidates, all.results, 0.7, SelectionPolicy::kMajority);
  EXPECT_EQ(accept.verdict, Verdict::kAccept);
  EXPECT_TRUE(accept.reasons.empty());
  EXPECT_DOUBLE_EQ(accept.success_rate, 1.0);

  const auto one = make({{"fix", true}, {"bad", false}, {"bad", false}});
  const auto reject = decide(one.candidates, one.results, 0.7, SelectionPolicy::kFirstPassing);
  EXPECT_EQ(reject.verdict, Verdict::kReject);
  ASSERT_FALSE(reject.reasons.empty());
  EXPECT_EQ(reject.reasons.front(), "success_rate 0.33 < 0.70");
  EXPECT_TRUE(reject.selected_patch.has_value());

  const auto none = make({{"bad", false}, {"bad", false}, {"bad", false}});
  const auto d = decide(none.candidates, none.results, 0.0, SelectionPolicy::kMajority);
  EXPECT_EQ(d.verdict, Verdict::kReject);
  EXPECT_FALSE(d.selected_patch.has_value());

  EXPECT_THROW(decide({}, {}, 0.7, SelectionPolicy::kMajority), InvalidArgumentError);
}

TEST(Decide, JsonShape) {
  const auto all = make({{"fix", true}, {"fix", true}, {"other thing", false}});
  const auto j = to_json(decide(all.candidates, all.results, 0.5, SelectionPolicy::kMajority));
  EXPECT_EQ(j["verdict"], "Accept");
  EXPECT_EQ(j["selected_patch"]["trial_index"], 0);
  EXPECT_EQ(j["threshold"], 0.5);
  ASSERT_EQ(j["clusters"].size(), 2u);
  EXPECT_EQ(j["clusters"][0]["members"].size(), 2u);
  EXPECT_TRUE(j["clusters"][0].contains("representative"));
  EXPECT_TRUE(j["clusters"][0].contains("cohesion"));
  EXPECT_TRUE(j["reasons"].is_array());
}
