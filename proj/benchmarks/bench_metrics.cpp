#include <benchmark/benchmark.h>

#include <vector>

#include "sumkit/evaluation.hpp"
#include "sumkit/rng.hpp"

namespace {

std::vector<float> scores(std::size_t n, std::uint64_t seed) {
  sumkit::Rng rng(seed);
  std::vector<float> v(n);
  rng.fill_uniform(v, 0.0, 1.0);
  return v;
}

void BM_KendallTau(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = scores(n, 1), b = scores(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(sumkit::kendall_tau(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KendallTau)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oNLogN);

void BM_SpearmanRho(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = scores(n, 3), b = scores(n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(sumkit::spearman_rho(a, b));
}
BENCHMARK(BM_SpearmanRho)->Arg(1024)->Arg(16384);

}  // namespace

BENCHMARK_MAIN();
