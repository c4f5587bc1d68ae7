#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "anw/noisefield/texel.hpp"
#include "anw/numeric/rng.hpp"
#include "anw/numeric/tape.hpp"
#include "anw/raster/motion_map.hpp"

namespace anw::noise {

/// Largest degradation level accepted by undegrade.
inline constexpr float kDefaultGammaMax = 0.95f;

/// Thrown by undegrade in the singular regime gamma >= gamma_max.
class SingularDegradation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class BackgroundNoise {
  kFreshPerFrame,  // i.i.d. per pixel and per frame
  kShared,         // one background draw reused by every frame
};

enum class FuseMode {
  kJoint,     // one texture for the whole clip
  kPerFrame,  // one texture per frame
};

/// U x V x C standard-normal texture; shared by every frame of a clip.
Tensor sample_noise_texture(Rng& rng, std::int64_t U, std::int64_t V, std::int64_t C);

/// Image-space noise (frames, H, W, C): covered pixels copy their texel,
/// background pixels get standard-normal draws from `background_rng`.
Tensor warp(const Tensor& texture, std::span<const raster::MotionMap> maps, Rng& background_rng,
            BackgroundNoise background = BackgroundNoise::kFreshPerFrame);

/// ((1 - g) * eps + g * zeta) / sqrt((1 - g)^2 + g^2), gamma in [0, 1].
Tensor degrade(const Tensor& eps, const Tensor& zeta, float gamma);

/// Exact inverse of degrade for the same zeta: (k * eps - g * zeta) / (1 - g)
/// with k = sqrt((1 - g)^2 + g^2). Throws SingularDegradation when
/// gamma >= gamma_max.
Tensor undegrade(const Tensor& eps_tilde, const Tensor& zeta, float gamma, float gamma_max = kDefaultGammaMax);
/// Differentiable form; zeta is a constant.
Var undegrade(Var eps_tilde, const Tensor& zeta, float gamma, float gamma_max = kDefaultGammaMax);

/// Output shape of downsample_spatiotemporal; throws ShapeError on
/// divisibility violations.
Shape downsampled_shape(const Shape& shape, std::int64_t s, std::int64_t r);
/// Nearest-neighbour downsampling (4f+1, H, W, C) -> (f+1, H/s, W/s, C):
/// output frame k reads input frame k*r, output pixel (y, x) reads (y*s, x*s).
Tensor downsample_spatiotemporal(const Tensor& noise, std::int64_t s, std::int64_t r);

/// The same index rule applied to motion maps, so latent-resolution maps stay
/// consistent with downsampled noise.
std::vector<raster::MotionMap> downsample_motion_maps(std::span<const raster::MotionMap> maps, std::int64_t s,
                                                      std::int64_t r);

struct FusedTexture {
  Tensor values;    // (U, V, C) joint, (F, U, V, C) per frame
  Tensor coverage;  // (U, V) joint, (F, U, V) per frame: contributing pixel counts
};

/// Inverse warp followed by average pooling per texel. Texels with zero
/// coverage hold 0. Accumulation is frame-major then row-major.
FusedTexture unwarp_fuse(const Tensor& noise, std::span<const raster::MotionMap> maps, std::int64_t U,
                         std::int64_t V, FuseMode mode = FuseMode::kJoint);

struct FusedVar {
  Var values;
  Tensor coverage;
};
/// Differentiable joint fusion; the adjoint of a texel is spread evenly over
/// its contributing pixels.
FusedVar unwarp_fuse(Var noise, std::span<const raster::MotionMap> maps, std::int64_t U, std::int64_t V);

}  // namespace anw::noise
