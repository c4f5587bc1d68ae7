#include <benchmark/benchmark.h>

#include "anw/app/dataset.hpp"
#include "anw/noisefield/noisefield.hpp"

namespace {

using namespace anw;

const app::Clip& clip() {
  static const app::Clip c = app::make_clip(app::RunConfig{}, "bench", 11);
  return c;
}

void BM_Warp(benchmark::State& state) {
  Rng rng(4);
  const Tensor texture = noise::sample_noise_texture(rng, 64, 64, 8);
  for (auto _ : state) {
    Rng bg(5);
    benchmark::DoNotOptimize(noise::warp(texture, clip().maps, bg).ptr());
  }
}
BENCHMARK(BM_Warp)->Unit(benchmark::kMillisecond);

void BM_UnwarpFuse(benchmark::State& state) {
  Rng rng(6);
  const Tensor texture = noise::sample_noise_texture(rng, 64, 64, 8);
  Rng bg(7);
  const Tensor warped = noise::warp(texture, clip().maps, bg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(noise::unwarp_fuse(warped, clip().maps, 64, 64).values.ptr());
  }
}
BENCHMARK(BM_UnwarpFuse)->Unit(benchmark::kMillisecond);

void BM_Downsample(benchmark::State& state) {
  Rng rng(8);
  const Tensor texture = noise::sample_noise_texture(rng, 64, 64, 8);
  Rng bg(9);
  const Tensor warped = noise::warp(texture, clip().maps, bg);
  for (auto _ : state) benchmark::DoNotOptimize(noise::downsample_spatiotemporal(warped, 8, 4).ptr());
}
BENCHMARK(BM_Downsample);

}  // namespace

BENCHMARK_MAIN();
