#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "patchgate/gate.hpp"
#include "patchgate/metrics.hpp"

namespace {

// Program-sized strings that share most of their text, like repeated samples
// for one problem.
std::vector<std::string> make_texts(std::size_t count, std::size_t length, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> ch('a', 'z');
  std::string base(length, ' ');
  for (auto& c : base) c = static_cast<char>(ch(rng));
  std::vector<std::string> texts;
  std::uniform_int_distribution<std::size_t> pos(0, length - 1);
  for (std::size_t i = 0; i < count; ++i) {
    std::string t = base;
    for (std::size_t e = 0; e < length / 10; ++e) t[pos(rng)] = static_cast<char>(ch(rng));
    texts.push_back(std::move(t));
  }
  return texts;
}

void BM_Levenshtein(benchmark::State& state) {
  const auto texts = make_texts(2, static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(patchgate::metrics::levenshtein_distance(texts[0], texts[1]));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Levenshtein)->RangeMultiplier(4)->Range(64, 4096)->Complexity(benchmark::oNSquared);

void BM_PairwiseStats(benchmark::State& state) {
  const auto texts = make_texts(static_cast<std::size_t>(state.range(0)), 600, 2);
  for (auto _ : state) benchmark::DoNotOptimize(patchgate::metrics::pairwise_similarity_stats(texts));
}
BENCHMARK(BM_PairwiseStats)->Arg(3)->Arg(10)->Arg(30);

void BM_ClusterTexts(benchmark::State& state) {
  const auto texts = make_texts(static_cast<std::size_t>(state.range(0)), 600, 3);
  for (auto _ : state) benchmark::DoNotOptimize(patchgate::gate::cluster_texts(texts, 0.7));
}
BENCHMARK(BM_ClusterTexts)->Arg(3)->Arg(10)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
