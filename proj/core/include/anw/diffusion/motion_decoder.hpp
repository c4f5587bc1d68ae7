#pragma once

#include <span>
#include <string>
#include <vector>

#include "anw/diffusion/parameters.hpp"

namespace anw::diffusion {

struct MotionDecoderConfig {
  std::int64_t channels = 8;  // latent channels C
  std::int64_t width1 = 16;
  std::int64_t width2 = 16;
  int spatial = 8;  // latent-to-image spatial factor s, divisible by 4
  int temporal = 4;

  std::string signature() const;
  friend bool operator==(const MotionDecoderConfig&, const MotionDecoderConfig&) = default;
};

/// Maps a latent video (1 + f, h, w, C) to motion maps (1 + f*r, h*s, w*s, 3)
/// holding (u, v, mask) in [0, 1].
///
/// Per latent frame: two upsample-conv-instancenorm-relu blocks, a 3-channel
/// convolution with sigmoid, then nearest upsampling by s/4. Image frames
/// take the prediction of the latent frame that encodes them.
class MotionDecoder {
 public:
  MotionDecoder() = default;
  MotionDecoder(MotionDecoderConfig config, ParameterSet params);

  static MotionDecoder initialize(const MotionDecoderConfig& config, Rng& rng);

  const MotionDecoderConfig& config() const noexcept { return config_; }
  ParameterSet& params() noexcept { return params_; }
  const ParameterSet& params() const noexcept { return params_; }

  Var forward(Tape& tape, std::span<const Var> bound, Var latent) const;
  Tensor predict(const Tensor& latent) const;

 private:
  MotionDecoderConfig config_;
  ParameterSet params_;
};

}  // namespace anw::diffusion
