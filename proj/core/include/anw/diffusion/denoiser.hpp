#pragma once

#include <span>
#include <string>

#include "anw/diffusion/parameters.hpp"

namespace anw::diffusion {

struct DenoiserConfig {
  std::int64_t channels = 8;  // latent channels C
  std::int64_t width1 = 32;   // full-resolution level
  std::int64_t width2 = 64;   // half-resolution level
  std::int64_t time_dim = 32;
  std::int64_t time_hidden = 64;

  std::string signature() const;
  friend bool operator==(const DenoiserConfig&, const DenoiserConfig&) = default;
};

/// Sinusoidal timestep features, half sines and half cosines.
Tensor timestep_embedding(int t, std::int64_t dim);

/// Factorized spatio-temporal noise predictor eps_theta(z_t; c, t).
///
/// Every frame of z_t is concatenated with the reference latent c, then
///   level 1: conv3x3 -> +time bias -> relu -> residual temporal conv -> relu
///   level 2: avgpool2 -> conv3x3 -> +time bias -> relu -> residual temporal conv -> relu
///   decoder: upsample2, concat level-1 skip, conv3x3 -> relu -> conv3x3 (output).
/// The timestep embedding goes through a two-layer perceptron whose two heads
/// give the per-channel biases of both levels. The latent height and width
/// must be even.
class Denoiser {
 public:
  Denoiser() = default;
  Denoiser(DenoiserConfig config, ParameterSet params);

  /// He-initialized weights; the output convolution is zero when `zero_output`.
  static Denoiser initialize(const DenoiserConfig& config, Rng& rng, bool zero_output = true);

  const DenoiserConfig& config() const noexcept { return config_; }
  ParameterSet& params() noexcept { return params_; }
  const ParameterSet& params() const noexcept { return params_; }

  /// z_t: (F, h, w, C); reference: (h, w, C). `bound` comes from params().bind.
  /// Throws ShapeError on mismatched shapes.
  Var forward(Tape& tape, std::span<const Var> bound, Var z_t, const Tensor& reference, int t) const;

  /// Gradient-free prediction.
  Tensor predict(const Tensor& z_t, const Tensor& reference, int t) const;

 private:
  DenoiserConfig config_;
  ParameterSet params_;
};

}  // namespace anw::diffusion
