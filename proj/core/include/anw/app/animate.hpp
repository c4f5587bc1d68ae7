#pragma once

#include <span>
#include <vector>

#include "anw/app/dataset.hpp"
#include "anw/eval/metrics.hpp"

namespace anw::app {

struct AnimateOptions {
  float gamma = 0.1f;
  int ddim_steps = 20;
  std::int64_t texture_u = 64;
  std::int64_t texture_v = 64;
  noise::BackgroundNoise background = noise::BackgroundNoise::kFreshPerFrame;
  std::uint64_t seed = 0;
};

AnimateOptions animate_options(const RunConfig& config);

struct Animation {
  std::vector<raster::MotionMap> maps;
  Tensor init_noise;  // degraded warped noise at latent resolution
  Tensor latent;      // sampled z0
  Tensor video;       // decoded (4f+1, H, W, 3)
};

/// Image-to-video inference: rasterize the pose sequence, warp a fresh noise
/// texture, degrade it at options.gamma, run deterministic sampling
/// conditioned on the reference frame (H, W, 3), and decode.
Animation animate(const diffusion::Model& model, const Tensor& reference_frame, const body::Skeleton& skeleton,
                  const body::PoseSequence& poses, const AnimateOptions& options);

/// Animates each clip from its own first frame and pose sequence, then scores
/// the result against the clip's render. Clip i uses seed options.seed + i.
std::vector<eval::ClipMetrics> evaluate_model(const diffusion::Model& model, std::span<const Clip> clips,
                                              const AnimateOptions& options);

}  // namespace anw::app
