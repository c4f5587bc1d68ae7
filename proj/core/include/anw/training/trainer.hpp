#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "anw/diffusion/checkpoint.hpp"
#include "anw/noisefield/noisefield.hpp"
#include "anw/training/adam.hpp"
#include "anw/training/losses.hpp"

namespace anw::train {

struct TrainConfig {
  LossWeights weights;
  AdamConfig adam;
  int batch_size = 2;
  int steps = 2000;
  double gamma_lo = 0.0;
  double gamma_hi = 1.0;
  float gamma_max = noise::kDefaultGammaMax;
  std::int64_t texture_u = 64;
  std::int64_t texture_v = 64;
  bool masked_md = false;
  noise::BackgroundNoise background = noise::BackgroundNoise::kFreshPerFrame;
  int checkpoint_every = 500;
  // Rescale the batch gradient to this global L2 norm when it is larger;
  // 0 disables clipping.
  double max_grad_norm = 1.0;
  std::uint64_t seed = 0;
};

/// Sets the loss weights of a named ablation: "base" (diffusion loss only),
/// "jaml" (+ motion decoder) or "full" (+ motion consistency). Throws
/// std::invalid_argument for other names.
void apply_preset(TrainConfig& config, const std::string& preset);

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A rendered clip and its motion maps at image resolution.
struct TrainingClip {
  Tensor video;                          // (4f+1, H, W, 3)
  std::vector<raster::MotionMap> maps;   // 4f+1 maps
};

/// Quantities derived once per clip.
struct PreparedClip {
  std::vector<raster::MotionMap> maps;
  std::vector<raster::MotionMap> latent_maps;
  Tensor z0;         // encoded video
  Tensor reference;  // latent of frame 0
  Tensor target;     // (4f+1, H, W, 3) motion decoder target
  Tensor mask;       // (4f+1, H, W)
};

PreparedClip prepare_clip(const TrainingClip& clip, const diffusion::LatentCodec& codec);

/// Random draws of one training sample.
struct SampleDraws {
  Tensor texture;  // (U, V, C)
  Tensor eps;      // warped then downsampled texture noise, latent shaped
  Tensor zeta;     // latent shaped
  float gamma = 0.0f;
  int t = 1;
};

SampleDraws draw_sample(const PreparedClip& clip, const diffusion::Model& model, const TrainConfig& config, Rng& rng);

struct LossBreakdown {
  double l_diff = 0.0;
  double l_mc = 0.0;
  double l_md = 0.0;
  double total = 0.0;
  float gamma = 0.0f;
  int t = 0;
  bool mc_skipped = false;
};

struct SampleResult {
  LossBreakdown losses;
  std::vector<Tensor> denoiser_grads;  // empty unless requested
  std::vector<Tensor> decoder_grads;
  std::uint64_t branch_signature = 0;  // see Tape::branch_signature
};

/// Full objective for fixed draws. Gradients are computed when `with_grads`.
/// L_mc is skipped (reported 0) when gamma >= gamma_max; L_md is evaluated
/// without gradient when its weight is zero.
SampleResult evaluate_sample(const diffusion::Model& model, const PreparedClip& clip, const SampleDraws& draws,
                             const TrainConfig& config, bool with_grads);

/// Optimizer over the denoiser parameters followed by the decoder parameters.
Adam make_optimizer(diffusion::Model& model, const AdamConfig& config);

/// Scales all gradients by max_norm / norm when their global L2 norm exceeds
/// max_norm. Returns the norm before scaling.
double clip_grad_norm(std::span<Tensor> grads, double max_norm);

/// One optimizer step on `batch` (indices into `clips`). Sample i of step s
/// draws from rng.stream(s).stream(i); gradients are averaged in batch order.
/// Throws NonFiniteLoss when a loss or gradient is not finite.
std::vector<LossBreakdown> train_step(diffusion::Model& model, Adam& optimizer, std::span<const PreparedClip> clips,
                                      std::span<const std::size_t> batch, const TrainConfig& config, const Rng& rng);

struct TrainOutputs {
  std::optional<std::filesystem::path> checkpoint;  // written every checkpoint_every steps and at the end
  std::optional<std::filesystem::path> log;         // CSV, one row per sample
};

/// Runs config.steps optimizer steps, sampling batches uniformly from `clips`.
/// `progress` (optional) is called after every step.
void train(diffusion::Model& model, std::span<const PreparedClip> clips, const TrainConfig& config,
           const TrainOutputs& outputs,
           const std::function<void(int step, const std::vector<LossBreakdown>&)>& progress = {});

void write_log_header(std::ostream& os);
void write_log_rows(std::ostream& os, std::int64_t step, const std::vector<LossBreakdown>& rows);

}  // namespace anw::train
