#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "patchgate/generation.hpp"
#include "patchgate/oracle.hpp"

namespace patchgate::gate {

inline constexpr double kDefaultTau = 0.7;
inline constexpr double kDefaultOerThreshold = 0.7;

/// Cluster over positions in the caller's list.
struct IndexCluster {
  std::vector<std::size_t> members;  // ascending scan order
  std::size_t representative = 0;
  double cohesion = 1.0;
};

/// Leader clustering followed by medoid refinement:
///  1. scan in order; join the first cluster whose representative is at
///     similarity >= tau, otherwise open a new cluster;
///  2. make each representative the medoid (max total similarity to the
///     other members, ties to the earliest);
///  3. members below tau from their medoid become singleton clusters, and
///     step 2 repeats until nothing moves.
/// Clusters are returned ordered by their first member.
std::vector<IndexCluster> cluster_texts(std::span<const std::string> texts, double tau);

struct PatchCluster {
  std::vector<CandidateRef> members;
  CandidateRef representative;
  double cohesion = 1.0;  // mean pairwise similarity; 1.0 for a singleton
};

/// Clusters candidates on extracted code, scanning in (temperature, trial) order.
std::vector<PatchCluster> cluster_patches(std::span<const PatchCandidate> candidates, double tau);

enum class SelectionPolicy { kMajority, kFirstPassing, kBestCluster };

std::string_view to_string(SelectionPolicy policy) noexcept;
/// ConfigError on an unknown name.
SelectionPolicy selection_policy_from_string(std::string_view text);

/// `results[i]` must describe `candidates[i]`.
///  - majority: only when passing trials are a strict majority; medoid of the
///    largest cluster of passing candidates;
///  - first_passing: earliest passing candidate in scan order;
///  - best_cluster: medoid of the passing cluster with the highest
///    cohesion x size.
std::optional<CandidateRef> select_patch(std::span<const PatchCandidate> candidates,
                                         std::span<const TrialResult> results,
                                         SelectionPolicy policy, double tau = kDefaultTau);

enum class Verdict { kAccept, kReject };
std::string_view to_string(Verdict verdict) noexcept;

struct GateDecision {
  Verdict verdict = Verdict::kReject;
  std::optional<CandidateRef> selected_patch;
  double success_rate = 0.0;
  double threshold = kDefaultOerThreshold;
  std::vector<PatchCluster> clusters;
  std::vector<std::string> reasons;
};

/// Decision for one (problem, temperature): Accept iff the pass fraction
/// reaches `oer_threshold` and the policy yields a passing patch.
GateDecision decide(std::span<const PatchCandidate> candidates,
                    std::span<const TrialResult> results, double oer_threshold,
                    SelectionPolicy policy, double tau = kDefaultTau);

Json to_json(const GateDecision& decision);

}  // namespace patchgate::gate
