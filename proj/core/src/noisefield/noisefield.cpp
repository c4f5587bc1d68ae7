#include "anw/noisefield/noisefield.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace anw::noise {
namespace {

void check_gamma(float gamma) {
  if (!(gamma >= 0.0f && gamma <= 1.0f)) {
    throw std::invalid_argument("degradation level must lie in [0, 1], got " + std::to_string(gamma));
  }
}

struct UndegradeCoefficients {
  float a;  // multiplies eps_tilde
  float b;  // multiplies zeta
};

UndegradeCoefficients undegrade_coefficients(float gamma, float gamma_max) {
  check_gamma(gamma);
  if (gamma >= gamma_max) {
    throw SingularDegradation("undegrade: gamma " + std::to_string(gamma) + " >= gamma_max " +
                              std::to_string(gamma_max));
  }
  const double g = gamma;
  const double k = std::sqrt((1.0 - g) * (1.0 - g) + g * g);
  return {static_cast<float>(k / (1.0 - g)), static_cast<float>(-g / (1.0 - g))};
}

}  // namespace

Tensor sample_noise_texture(Rng& rng, std::int64_t U, std::int64_t V, std::int64_t C) {
  if (U < 1 || V < 1 || C < 1) throw std::invalid_argument("noise texture dimensions must be positive");
  return sample_standard_normal(rng, Shape{U, V, C});
}

Tensor warp(const Tensor& texture, std::span<const raster::MotionMap> maps, Rng& background_rng,
            BackgroundNoise background) {
  if (texture.rank() != 3) throw ShapeError("warp: texture must be U x V x C");
  if (maps.empty()) throw ShapeError("warp: no motion maps");
  const std::int64_t U = texture.dim(0);
  const std::int64_t V = texture.dim(1);
  const std::int64_t C = texture.dim(2);
  const std::int64_t H = maps[0].height;
  const std::int64_t W = maps[0].width;
  const auto frames = static_cast<std::int64_t>(maps.size());
  Tensor out(Shape{frames, H, W, C});

  Tensor shared_bg;
  if (background == BackgroundNoise::kShared) {
    Rng bg = background_rng.stream("shared");
    shared_bg = sample_standard_normal(bg, Shape{H, W, C});
  }
  for (std::int64_t f = 0; f < frames; ++f) {
    const raster::MotionMap& m = maps[static_cast<std::size_t>(f)];
    if (m.height != H || m.width != W) throw ShapeError("warp: motion maps differ in resolution");
    Rng bg = background_rng.stream(static_cast<std::uint64_t>(f));
    float* dst = out.ptr() + f * H * W * C;
    for (std::int64_t p = 0; p < H * W; ++p) {
      float* px = dst + p * C;
      if (m.mask[static_cast<std::size_t>(p)]) {
        const auto t = texel_index(m.u[static_cast<std::size_t>(p)], m.v[static_cast<std::size_t>(p)], U, V);
        std::memcpy(px, texture.ptr() + (t.i * V + t.j) * C, static_cast<std::size_t>(C) * sizeof(float));
      } else if (background == BackgroundNoise::kShared) {
        std::memcpy(px, shared_bg.ptr() + p * C, static_cast<std::size_t>(C) * sizeof(float));
      } else {
        for (std::int64_t c = 0; c < C; ++c) px[c] = bg.normal();
      }
    }
  }
  return out;
}

Tensor degrade(const Tensor& eps, const Tensor& zeta, float gamma) {
  require_same_shape(eps, zeta, "degrade");
  check_gamma(gamma);
  const double g = gamma;
  const double k = std::sqrt((1.0 - g) * (1.0 - g) + g * g);
  const auto a = static_cast<float>((1.0 - g) / k);
  const auto b = static_cast<float>(g / k);
  Tensor out = Tensor::zeros_like(eps);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * eps[i] + b * zeta[i];
  return out;
}

Tensor undegrade(const Tensor& eps_tilde, const Tensor& zeta, float gamma, float gamma_max) {
  require_same_shape(eps_tilde, zeta, "undegrade");
  const auto [a, b] = undegrade_coefficients(gamma, gamma_max);
  Tensor out = Tensor::zeros_like(eps_tilde);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * eps_tilde[i] + b * zeta[i];
  return out;
}

Var undegrade(Var eps_tilde, const Tensor& zeta, float gamma, float gamma_max) {
  require_same_shape(eps_tilde.value(), zeta, "undegrade");
  const auto [a, b] = undegrade_coefficients(gamma, gamma_max);
  Tape& tape = *eps_tilde.tape();
  Tensor out = Tensor::zeros_like(zeta);
  const Tensor& x = eps_tilde.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i] + b * zeta[i];
  return tape.record(std::move(out), {eps_tilde}, [eps_tilde, a = a](Tape& t, const Tensor& g) {
    if (!t.requires_grad(eps_tilde)) return;
    Tensor& buf = t.grad_buffer(eps_tilde);
    for (std::size_t i = 0; i < g.size(); ++i) buf[i] += a * g[i];
  });
}

Shape downsampled_shape(const Shape& shape, std::int64_t s, std::int64_t r) {
  if (shape.size() != 4) throw ShapeError("downsample: expected (frames, H, W, C), got " + shape_string(shape));
  if (s < 1 || r < 1) throw std::invalid_argument("downsample: factors must be positive");
  const std::int64_t F = shape[0];
  if (shape[1] % s != 0 || shape[2] % s != 0) {
    throw ShapeError("downsample: spatial size " + shape_string(shape) + " not divisible by " + std::to_string(s));
  }
  if (F < 1 || (F - 1) % r != 0) {
    throw ShapeError("downsample: frame count " + std::to_string(F) + " is not 1 mod " + std::to_string(r));
  }
  return {(F - 1) / r + 1, shape[1] / s, shape[2] / s, shape[3]};
}

Tensor downsample_spatiotemporal(const Tensor& noise, std::int64_t s, std::int64_t r) {
  const Shape out_shape = downsampled_shape(noise.shape(), s, r);
  const std::int64_t H = noise.dim(1);
  const std::int64_t W = noise.dim(2);
  const std::int64_t C = noise.dim(3);
  const std::int64_t of = out_shape[0];
  const std::int64_t oh = out_shape[1];
  const std::int64_t ow = out_shape[2];
  Tensor out(Shape{of, oh, ow, C});
  for (std::int64_t k = 0; k < of; ++k) {
    for (std::int64_t y = 0; y < oh; ++y) {
      for (std::int64_t x = 0; x < ow; ++x) {
        std::memcpy(out.ptr() + ((k * oh + y) * ow + x) * C, noise.ptr() + (((k * r) * H + y * s) * W + x * s) * C,
                    static_cast<std::size_t>(C) * sizeof(float));
      }
    }
  }
  return out;
}

std::vector<raster::MotionMap> downsample_motion_maps(std::span<const raster::MotionMap> maps, std::int64_t s,
                                                      std::int64_t r) {
  if (maps.empty()) throw ShapeError("downsample_motion_maps: no maps");
  if (s < 1 || r < 1) throw std::invalid_argument("downsample_motion_maps: factors must be positive");
  const auto F = static_cast<std::int64_t>(maps.size());
  const std::int64_t H = maps[0].height;
  const std::int64_t W = maps[0].width;
  if (H % s != 0 || W % s != 0) throw ShapeError("downsample_motion_maps: resolution not divisible by s");
  if ((F - 1) % r != 0) throw ShapeError("downsample_motion_maps: frame count is not 1 mod r");
  std::vector<raster::MotionMap> out;
  for (std::int64_t k = 0; k <= (F - 1) / r; ++k) {
    const raster::MotionMap& src = maps[static_cast<std::size_t>(k * r)];
    raster::MotionMap m(H / s, W / s);
    for (std::int64_t y = 0; y < m.height; ++y) {
      for (std::int64_t x = 0; x < m.width; ++x) {
        const auto d = static_cast<std::size_t>(y * m.width + x);
        const auto p = static_cast<std::size_t>((y * s) * W + x * s);
        m.u[d] = src.u[p];
        m.v[d] = src.v[p];
        m.part[d] = src.part[p];
        m.mask[d] = src.mask[p];
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace anw::noise
