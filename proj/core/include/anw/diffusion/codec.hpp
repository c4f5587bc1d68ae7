#pragma once

#include <cstdint>
#include <vector>

#include "anw/numeric/tensor.hpp"

namespace anw::diffusion {

/// Frozen linear stand-in for a video autoencoder. Latent frame 0 encodes
/// image frame 0 alone; latent frame k >= 1 averages image frames
/// r(k-1)+1 .. rk. Spatially s x s blocks are averaged. Channels 0..2 hold
/// the RGB means, the remaining latent channels are zero.
struct LatentCodec {
  std::int64_t spatial = 8;   // s
  std::int64_t temporal = 4;  // r
  std::int64_t channels = 8;  // C
  // Affine map between codec latents and the space diffusion runs in:
  // scale * (z - shift) on the RGB channels, scale * z on the rest.
  double latent_shift = 0.0;
  double latent_scale = 1.0;

  /// (r f + 1, H, W, 3) -> (f + 1, H/s, W/s, C). Throws ShapeError on
  /// divisibility violations.
  Tensor encode(const Tensor& video) const;
  /// (H, W, 3) -> (H/s, W/s, C), the latent of a single reference frame.
  Tensor encode_frame(const Tensor& frame) const;
  /// (f + 1, h, w, C) -> (r f + 1, h s, w s, 3), nearest upsampling and frame
  /// replication; RGB clamped to [0, 1].
  Tensor decode(const Tensor& latent) const;

  /// Codec latent -> diffusion space, and back. Any trailing shape whose last
  /// axis is C.
  Tensor normalize(const Tensor& latent) const;
  Tensor denormalize(const Tensor& z) const;

  /// Latent frame index carrying each of the r f + 1 image frames.
  std::vector<std::int64_t> frame_layout(std::int64_t latent_frames) const;
};

}  // namespace anw::diffusion
