#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "anw/app/dataset.hpp"
#include "anw/training/trainer.hpp"

namespace {

using namespace anw;

// One optimizer step at the default desk scale (batch 2), per preset.
void BM_TrainStep(benchmark::State& state, const std::string& preset) {
  const app::RunConfig cfg;
  std::vector<train::PreparedClip> clips;
  for (const auto& c : app::make_clips(cfg, "bench", 4)) clips.push_back(train::prepare_clip(app::training_clip(c), cfg.codec));
  Rng rng(3);
  diffusion::Model model =
      diffusion::initialize_model(cfg.codec, cfg.schedule, cfg.denoiser_config(), cfg.decoder_config(), rng);
  train::TrainConfig tc = cfg.train;
  train::apply_preset(tc, preset);
  train::Adam adam = train::make_optimizer(model, tc.adam);
  const std::vector<std::size_t> batch{0, 1};
  const Rng samples(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(train::train_step(model, adam, clips, batch, tc, samples));
  }
}
BENCHMARK_CAPTURE(BM_TrainStep, base, std::string("base"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainStep, jaml, std::string("jaml"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainStep, full, std::string("full"))->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
