#include "anw/training/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "anw/raster/rasterizer.hpp"
#include "anw/training/reference_objective.hpp"

namespace anw::train {
namespace {

struct Miniature {
  diffusion::Model model;
  PreparedClip clip;
  SampleDraws draws;
  TrainConfig config;
};

Miniature build(const GradientCheckConfig& gc) {
  Miniature m;
  Rng rng(gc.seed);
  const diffusion::LatentCodec codec{8, 4, 4};
  const diffusion::DenoiserConfig dc{4, 3, 4, 4, 4};
  const diffusion::MotionDecoderConfig mc{4, 2, 2, 8, 4};
  m.model = diffusion::initialize_model(codec, {20, 1e-4, 0.02}, dc, mc, rng);
  if (!gc.zero_final_layers) {
    Rng out_rng = rng.stream("output");
    Tensor& w = m.model.denoiser.params().at("out.w");
    w = diffusion::he_normal(out_rng, w.shape(), 9 * dc.width1, 0.5);
  }

  const auto skeleton = body::Skeleton::default_humanoid();
  body::MotionOptions opts;
  opts.root_center = {16.0, 13.0};
  opts.root_jitter = 1.0;
  Rng pose_rng = rng.stream("poses");
  const auto poses = body::generate_pose_sequence(skeleton, pose_rng, 1, 0.4, opts);
  const body::Skeleton small = body::scale_skeleton(skeleton, 0.3);
  const auto maps = raster::rasterize_sequence(small, poses, 32, 32);
  TrainingClip clip{raster::render_video(maps, raster::default_appearance_texture(16)), maps};
  m.clip = prepare_clip(clip, codec);

  m.config.weights = gc.weights;
  m.config.texture_u = 16;
  m.config.texture_v = 16;
  Rng draw_rng = rng.stream("draws");
  m.draws = draw_sample(m.clip, m.model, m.config, draw_rng);
  m.draws.gamma = gc.gamma;
  m.draws.t = std::min(gc.t, m.model.schedule.steps);
  return m;
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

GradientCheckReport gradient_check(const GradientCheckConfig& gc) {
  Miniature m = build(gc);
  const SampleResult base = evaluate_sample(m.model, m.clip, m.draws, m.config, true);
  ReferenceParameters ref = reference_parameters(m.model);
  const ReferenceLosses ref_base = reference_objective(m.model, ref, m.clip, m.draws, m.config);

  GradientCheckReport report;
  report.parameter_count = m.model.denoiser.params().numel() + m.model.decoder.params().numel();
  report.forward_rel_diff = std::abs(base.losses.total - ref_base.total) / std::max(std::abs(ref_base.total), 1e-30);
  auto check_set = [&](std::vector<std::vector<double>>& values, const diffusion::ParameterSet& set,
                       const std::vector<Tensor>& grads, const std::string& prefix) {
    for (std::size_t k = 0; k < set.size(); ++k) {
      std::vector<double>& p = values[k];
      double largest = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        largest = std::max(largest, std::abs(static_cast<double>(grads[k][i])));
        const double saved = p[i];
        // Halve the step until both probes stay on the base linear piece.
        std::optional<double> numeric;
        for (int attempt = 0; attempt < 4 && !numeric; ++attempt) {
          const double h = gc.step / static_cast<double>(1 << (2 * attempt));
          p[i] = saved + h;
          const ReferenceLosses up = reference_objective(m.model, ref, m.clip, m.draws, m.config);
          p[i] = saved - h;
          const ReferenceLosses down = reference_objective(m.model, ref, m.clip, m.draws, m.config);
          p[i] = saved;
          if (up.branch_signature == ref_base.branch_signature && down.branch_signature == ref_base.branch_signature) {
            numeric = (up.total - down.total) / (2.0 * h);
          }
        }
        if (!numeric) {
          ++report.kink_crossings;
          continue;
        }
        const double analytic = grads[k][i];
        const double err = relative_error(analytic, *numeric, gc.floor);
        if (err >= report.max_rel_error) {
          report.max_rel_error = err;
          report.worst = {prefix + set.name(k), i, analytic, *numeric, err};
        }
      }
      report.grad_magnitudes.emplace_back(prefix + set.name(k), largest);
    }
  };
  check_set(ref.denoiser, m.model.denoiser.params(), base.denoiser_grads, "denoiser.");
  check_set(ref.decoder, m.model.decoder.params(), base.decoder_grads, "decoder.");
  return report;
}

}  // namespace anw::train
