#include <benchmark/benchmark.h>

#include "anw/numeric/ops.hpp"
#include "anw/numeric/rng.hpp"

namespace {

using namespace anw;

// Sizes match the default denoiser: latent 3x12x16, up block 96 -> 32 channels.
void BM_Conv3x3Forward(benchmark::State& state) {
  const auto ci = state.range(0);
  const auto co = state.range(1);
  Rng rng(1);
  const Tensor x = sample_standard_normal(rng, {3, 12, 16, ci});
  const Tensor w = sample_standard_normal(rng, {3, 3, ci, co});
  const Tensor b(Shape{co});
  for (auto _ : state) {
    Tape tape(false);
    benchmark::DoNotOptimize(ops::conv3x3(tape.constant(x), tape.constant(w), tape.constant(b)).value().ptr());
  }
}
BENCHMARK(BM_Conv3x3Forward)->Args({16, 32})->Args({96, 32})->Args({16, 16});

void BM_Conv3x3Backward(benchmark::State& state) {
  const auto ci = state.range(0);
  const auto co = state.range(1);
  Rng rng(2);
  const Tensor x = sample_standard_normal(rng, {3, 12, 16, ci});
  const Tensor w = sample_standard_normal(rng, {3, 3, ci, co});
  const Tensor b(Shape{co});
  for (auto _ : state) {
    Tape tape(true);
    Var xv = tape.parameter(x);
    Var y = ops::conv3x3(xv, tape.parameter(w), tape.parameter(b));
    tape.backward(ops::mean(y));
    benchmark::DoNotOptimize(tape.grad(xv).ptr());
  }
}
BENCHMARK(BM_Conv3x3Backward)->Args({16, 32})->Args({96, 32})->Args({16, 16});

void BM_TemporalConv3(benchmark::State& state) {
  Rng rng(3);
  const Tensor x = sample_standard_normal(rng, {3, 12, 16, 32});
  const Tensor w = sample_standard_normal(rng, {3, 32, 32});
  const Tensor b(Shape{32});
  for (auto _ : state) {
    Tape tape(true);
    Var xv = tape.parameter(x);
    tape.backward(ops::mean(ops::temporal_conv3(xv, tape.parameter(w), tape.parameter(b))));
    benchmark::DoNotOptimize(tape.grad(xv).ptr());
  }
}
BENCHMARK(BM_TemporalConv3);

}  // namespace

BENCHMARK_MAIN();
