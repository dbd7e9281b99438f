#include <benchmark/benchmark.h>

#include <vector>

#include "sumkit/rng.hpp"
#include "sumkit/summary.hpp"

namespace {

// shots of 10-40 frames until the video reaches n frames
std::vector<sumkit::ShotScore> make_shots(std::size_t n) {
  sumkit::Rng rng(n);
  std::vector<std::size_t> b{0};
  while (b.back() < n) b.push_back(std::min(n, b.back() + 10 + rng.below(31)));
  std::vector<float> scores(n);
  rng.fill_uniform(scores, 0.0, 1.0);
  return sumkit::frame_to_shot_scores(scores, b);
}

void BM_Knapsack(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto shots = make_shots(n);
  for (auto _ : state) {
    auto s = sumkit::knapsack_select(shots, n * 15 / 100, n);
    benchmark::DoNotOptimize(s.objective);
  }
  state.counters["shots"] = static_cast<double>(shots.size());
}
BENCHMARK(BM_Knapsack)->Arg(500)->Arg(2000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
