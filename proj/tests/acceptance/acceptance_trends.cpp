// Desk-scale ablation trends (criteria 8 and 9). Trains base / jaml / full
// for three training seeds on the default synthetic dataset, scores the
// held-out clips, then sweeps inference gamma on the full checkpoints.
//
// Usage: acceptance_trends [section.key=value ...]

#include <chrono>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "anw/app/animate.hpp"
#include "anw/app/commands.hpp"
#include "anw/app/dataset.hpp"

using namespace anw;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

void report(bool pass, int id, const std::string& name, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << detail << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> overrides(argv + 1, argv + argc);
  const app::RunConfig base_config = app::load_config(nullptr, overrides);
  const std::vector<std::string> presets{"base", "jaml", "full"};
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const std::vector<float> gammas{0.1f, 0.3f, 0.5f, 0.7f, 1.0f};

  const auto train_clips = app::make_clips(base_config, "train", base_config.data.clips);
  const auto heldout = app::make_clips(base_config, "heldout", base_config.data.heldout_clips);
  std::vector<train::PreparedClip> prepared;
  for (const auto& c : train_clips) prepared.push_back(train::prepare_clip(app::training_clip(c), base_config.codec));
  std::cout << "dataset: " << train_clips.size() << " training clips, " << heldout.size() << " held-out clips, "
            << base_config.train.steps << " steps per run" << std::endl;

  std::map<std::string, eval::ClipMetrics> mean;  // per preset, averaged over seeds
  std::map<std::uint64_t, diffusion::Model> full_models;
  double train_seconds = 0.0;
  for (const auto& preset : presets) {
    for (std::uint64_t seed : seeds) {
      app::RunConfig cfg = base_config;
      cfg.preset = preset;
      train::apply_preset(cfg.train, preset);
      cfg.train.seed = seed;
      Rng rng = Rng(seed).stream("init");
      diffusion::Model model =
          diffusion::initialize_model(cfg.codec, cfg.schedule, cfg.denoiser_config(), cfg.decoder_config(), rng);
      const auto start = Clock::now();
      train::train(model, prepared, cfg.train, {}, {});
      const double secs = seconds_since(start);
      train_seconds += secs;

      app::AnimateOptions opts = app::animate_options(cfg);
      opts.seed = seed;
      const auto m = eval::aggregate(app::evaluate_model(model, heldout, opts));
      std::cout << std::fixed << std::setprecision(4) << preset << " seed " << seed << ": iou " << m.silhouette_iou
                << ", masked l1 " << m.masked_l1 << ", l1 " << m.l1 << ", ssim " << m.ssim << ", flicker " << m.flicker
                << std::setprecision(1) << " (train " << secs << " s)" << std::defaultfloat << std::endl;
      auto& acc = mean[preset];
      const double w = 1.0 / static_cast<double>(seeds.size());
      acc.silhouette_iou += w * m.silhouette_iou;
      acc.masked_l1 += w * m.masked_l1;
      acc.l1 += w * m.l1;
      acc.ssim += w * m.ssim;
      acc.flicker += w * m.flicker;
      if (preset == "full") full_models.emplace(seed, std::move(model));
    }
  }

  const auto& b = mean["base"];
  const auto& j = mean["jaml"];
  const auto& f = mean["full"];
  for (const auto& p : presets) {
    const auto& m = mean[p];
    std::cout << std::fixed << std::setprecision(4) << "mean " << p << ": iou " << m.silhouette_iou << ", masked l1 "
              << m.masked_l1 << ", l1 " << m.l1 << ", ssim " << m.ssim << ", flicker " << m.flicker
              << std::defaultfloat << std::endl;
  }
  const double rel = (b.masked_l1 - f.masked_l1) / b.masked_l1;
  const bool ordering = f.silhouette_iou >= j.silhouette_iou && j.silhouette_iou >= b.silhouette_iou;
  const bool budget = train_seconds <= 45 * 60;
  bool pass8 = false, pass9 = false;
  {
    std::ostringstream os;
    os << std::setprecision(4) << "iou full " << f.silhouette_iou << " >= jaml " << j.silhouette_iou << " >= base "
       << b.silhouette_iou << (ordering ? " holds" : " violated") << "; masked l1 full " << f.masked_l1 << " vs base "
       << b.masked_l1 << " (" << 100 * rel << "% lower, >= 5% required); training " << std::fixed << std::setprecision(1)
       << train_seconds / 60 << " min (<= 45)";
    pass8 = ordering && rel >= 0.05 && budget;
    report(pass8, 8, "ablation trend", os.str());
  }

  const auto sweep_start = Clock::now();
  std::vector<double> iou(gammas.size(), 0.0);
  for (auto& [seed, model] : full_models) {
    app::RunConfig cfg = base_config;
    app::AnimateOptions opts = app::animate_options(cfg);
    opts.seed = seed;
    const auto rows = app::sweep_gamma(model, heldout, opts, gammas);
    std::ostringstream line;
    line << "sweep seed " << seed << ":";
    for (std::size_t g = 0; g < rows.size(); ++g) {
      iou[g] += rows[g].metrics.silhouette_iou / static_cast<double>(full_models.size());
      line << " gamma " << rows[g].gamma << " iou " << std::setprecision(4) << rows[g].metrics.silhouette_iou;
    }
    std::cout << line.str() << std::endl;
  }
  const double sweep_seconds = seconds_since(sweep_start);
  {
    std::ostringstream os;
    os << std::setprecision(4) << "mean iou by gamma:";
    for (std::size_t g = 0; g < gammas.size(); ++g) os << " " << gammas[g] << "->" << iou[g];
    os << "; iou(0.1) " << iou.front() << " > iou(1.0) " << iou.back() << (iou.front() > iou.back() ? " holds" : " violated")
       << "; sweep " << std::fixed << std::setprecision(1) << sweep_seconds / 60 << " min (< 10)";
    pass9 = iou.front() > iou.back() && sweep_seconds < 600;
    report(pass9, 9, "gamma sweep trend", os.str());
  }
  return pass8 && pass9 ? 0 : 1;
}
