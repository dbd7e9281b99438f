#include <benchmark/benchmark.h>

#include "sumkit/autodiff.hpp"
#include "sumkit/losses.hpp"
#include "sumkit/model.hpp"
#include "sumkit/rng.hpp"

namespace {

// (embed_dim, layers per stack); frames fixed at one 256 window
sumkit::ModelParams make_model(std::size_t dim, std::size_t layers) {
  sumkit::ModelConfig c;
  c.embed_dim = dim;
  c.tf_enc_layers = layers;
  c.tf_dec_layers = layers;
  return sumkit::ModelParams::init(c, 1);
}

sumkit::Tensor random(std::size_t r, std::size_t c, std::uint64_t seed) {
  sumkit::Rng rng(seed);
  sumkit::Tensor t = sumkit::Tensor::matrix(r, c);
  rng.fill_uniform(t.data(), -1.0, 1.0);
  return t;
}

void BM_ScoreVideo(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  auto model = make_model(dim, static_cast<std::size_t>(state.range(1)));
  const sumkit::FeatureBundle bundle{"bench", random(256, dim, 2), 2.0, random(7, dim, 3),
                                     sumkit::FeatureKind::captions};
  for (auto _ : state) benchmark::DoNotOptimize(sumkit::score_video(model, bundle));
}
BENCHMARK(BM_ScoreVideo)->Args({32, 2})->Args({64, 2})->Args({64, 6})->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  auto model = make_model(dim, 2);
  const sumkit::Tensor frames = random(256, dim, 4), text = random(7, dim, 5);
  for (auto _ : state) {
    sumkit::Tape tape(true);
    auto fwd = sumkit::forward(tape, model, frames, text, sumkit::FeatureKind::captions);
    tape.backward(sumkit::ops::mean(fwd.output.scores));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
