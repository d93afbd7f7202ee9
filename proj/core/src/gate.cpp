#include "patchgate/gate.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "patchgate/errors.hpp"
#include "patchgate/metrics.hpp"
#include "patchgate/text.hpp"

namespace patchgate::gate {

namespace {

using Matrix = std::vector<std::vector<double>>;

Matrix similarity_matrix(std::span<const std::string> texts) {
  const std::size_t n = texts.size();
  Matrix m(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      m[i][j] = m[j][i] = metrics::levenshtein_similarity(texts[i], texts[j]);
    }
  }
  return m;
}

std::size_t medoid(const std::vector<std::size_t>& members, const Matrix& sim) {
  std::size_t best = members.front();
  double best_total = -1.0;
  for (std::size_t a : members) {
    double total = 0.0;
    for (std::size_t b : members) {
      if (a != b) total += sim[a][b];
    }
    if (total > best_total) {
      best_total = total;
      best = a;
    }
  }
  return best;
}

double cohesion(const std::vector<std::size_t>& members, const Matrix& sim) {
  if (members.size() < 2) return 1.0;
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      total += sim[members[i]][members[j]];
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

std::vector<IndexCluster> cluster_matrix(const Matrix& sim, double tau) {
  const std::size_t n = sim.size();
  std::vector<IndexCluster> clusters;
  for (std::size_t i = 0; i < n; ++i) {
    auto it = std::find_if(clusters.begin(), clusters.end(),
                           [&](const IndexCluster& c) { return sim[c.representative][i] >= tau; });
    if (it != clusters.end()) {
      it->members.push_back(i);
    } else {
      clusters.push_back({{i}, i, 1.0});
    }
  }

  for (bool moved = true; moved;) {
    moved = false;
    std::vector<IndexCluster> split;
    for (auto& c : clusters) {
      c.representative = medoid(c.members, sim);
      std::vector<std::size_t> kept;
      for (std::size_t m : c.members) {
        if (sim[c.representative][m] >= tau) {
          kept.push_back(m);
        } else {
          split.push_back({{m}, m, 1.0});
          moved = true;
        }
      }
      c.members = std::move(kept);
    }
    clusters.insert(clusters.end(), split.begin(), split.end());
  }

  for (auto& c : clusters) c.cohesion = cohesion(c.members, sim);
  std::sort(clusters.begin(), clusters.end(),
            [](const IndexCluster& a, const IndexCluster& b) { return a.members.front() < b.members.front(); });
  return clusters;
}

void check_tau(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgumentError(fmt::format("tau {} outside [0, 1]", tau));
}

// Indices of `candidates` in (temperature, trial_index) order.
std::vector<std::size_t> scan_order(std::span<const PatchCandidate> candidates) {
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = candidates[a];
    const auto& y = candidates[b];
    if (x.temperature != y.temperature) return x.temperature < y.temperature;
    return x.trial_index < y.trial_index;
  });
  return order;
}

void check_pairing(std::span<const PatchCandidate> candidates, std::span<const TrialResult> results) {
  if (candidates.size() != results.size()) {
    throw InvalidArgumentError(
        fmt::format("{} candidates but {} trial results", candidates.size(), results.size()));
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (results[i].candidate != candidates[i].ref()) {
      throw InvalidArgumentError(fmt::format("trial result {} describes {}, expected {}", i,
                                             to_string(results[i].candidate), to_string(candidates[i].ref())));
    }
  }
}

}  // namespace

std::vector<IndexCluster> cluster_texts(std::span<const std::string> texts, double tau) {
  check_tau(tau);
  return cluster_matrix(similarity_matrix(texts), tau);
}

std::vector<PatchCluster> cluster_patches(std::span<const PatchCandidate> candidates, double tau) {
  check_tau(tau);
  const auto order = scan_order(candidates);
  std::vector<std::string> texts;
  texts.reserve(order.size());
  for (std::size_t i : order) texts.push_back(candidates[i].extracted_code);

  std::vector<PatchCluster> out;
  for (const auto& c : cluster_texts(texts, tau)) {
    PatchCluster pc;
    for (std::size_t m : c.members) pc.members.push_back(candidates[order[m]].ref());
    pc.representative = candidates[order[c.representative]].ref();
    pc.cohesion = c.cohesion;
    out.push_back(std::move(pc));
  }
  return out;
}

std::string_view to_string(SelectionPolicy policy) noexcept {
  switch (policy) {
    case SelectionPolicy::kMajority: return "majority";
    case SelectionPolicy::kFirstPassing: return "first_passing";
    case SelectionPolicy::kBestCluster: return "best_cluster";
  }
  return "majority";
}

SelectionPolicy selection_policy_from_string(std::string_view text) {
  if (text == "majority") return SelectionPolicy::kMajority;
  if (text == "first_passing") return SelectionPolicy::kFirstPassing;
  if (text == "best_cluster") return SelectionPolicy::kBestCluster;
  throw ConfigError(
      fmt::format("unknown selection policy '{}' (expected majority, first_passing or best_cluster)", text));
}

std::optional<CandidateRef> select_patch(std::span<const PatchCandidate> candidates,
                                         std::span<const TrialResult> results, SelectionPolicy policy,
                                         double tau) {
  check_pairing(candidates, results);
  check_tau(tau);

  std::vector<PatchCandidate> passing;
  for (std::size_t i : scan_order(candidates)) {
    if (results[i].pass_all) passing.push_back(candidates[i]);
  }
  if (passing.empty()) return std::nullopt;

  switch (policy) {
    case SelectionPolicy::kFirstPassing:
      return passing.front().ref();
    case SelectionPolicy::kMajority: {
      if (2 * passing.size() <= candidates.size()) return std::nullopt;
      const auto clusters = cluster_patches(passing, tau);
      const PatchCluster* best = &clusters.front();
      for (const auto& c : clusters) {
        if (c.members.size() > best->members.size()) best = &c;
      }
      return best->representative;
    }
    case SelectionPolicy::kBestCluster: {
      const auto clusters = cluster_patches(passing, tau);
      const PatchCluster* best = &clusters.front();
      double best_score = best->cohesion * static_cast<double>(best->members.size());
      for (const auto& c : clusters) {
        const double score = c.cohesion * static_cast<double>(c.members.size());
        if (score > best_score) {
          best_score = score;
          best = &c;
        }
      }
      return best->representative;
    }
  }
  return std::nullopt;
}

std::string_view to_string(Verdict verdict) noexcept {
  return verdict == Verdict::kAccept ? "Accept" : "Reject";
}

GateDecision decide(std::span<const PatchCandidate> candidates, std::span<const TrialResult> results,
                    double oer_threshold, SelectionPolicy policy, double tau) {
  check_pairing(candidates, results);
  if (candidates.empty()) throw InvalidArgumentError("gate decision needs at least one trial");

  GateDecision d;
  d.threshold = oer_threshold;
  const auto passed = static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [](const TrialResult& r) { return r.pass_all; }));
  d.success_rate = static_cast<double>(passed) / static_cast<double>(results.size());
  d.clusters = cluster_patches(candidates, tau);
  d.selected_patch = select_patch(candidates, results, policy, tau);

  const bool rate_ok = d.success_rate >= oer_threshold;
  if (!rate_ok) {
    d.reasons.push_back(fmt::format("success_rate {} < {}", format_display(d.success_rate),
                                    format_display(oer_threshold)));
  }
  if (!d.selected_patch) {
    d.reasons.push_back(passed == 0
                            ? std::string("no candidate passes every test case")
                            : fmt::format("policy {} selected no patch", to_string(policy)));
  }
  d.verdict = rate_ok && d.selected_patch ? Verdict::kAccept : Verdict::kReject;
  return d;
}

Json to_json(const GateDecision& decision) {
  Json clusters = Json::array();
  for (const auto& c : decision.clusters) {
    Json members = Json::array();
    for (const auto& m : c.members) members.push_back(to_json(m));
    clusters.push_back(Json{{"members", std::move(members)},
                            {"representative", to_json(c.representative)},
                            {"cohesion", c.cohesion}});
  }
  return Json{{"verdict", std::string(to_string(decision.verdict))},
              {"selected_patch", decision.selected_patch ? to_json(*decision.selected_patch) : Json(nullptr)},
              {"success_rate", decision.success_rate},
              {"threshold", decision.threshold},
              {"clusters", std::move(clusters)},
              {"reasons", decision.reasons}};
}

}  // namespace patchgate::gate
