#include "anw/raster/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "anw/noisefield/texel.hpp"
#include "anw/numeric/parallel.hpp"

namespace anw::raster {

MotionMap rasterize_motion_map(const body::Skeleton& skeleton, const body::Pose& pose, std::int64_t height,
                               std::int64_t width) {
  if (height < 8 || width < 8) throw std::invalid_argument("rasterize_motion_map: H and W must be >= 8");
  const auto frames = body::forward_kinematics(skeleton, pose);
  MotionMap map(height, width);
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      const body::Vec2 p{static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5};
      // Painter's order: scan from the top-most bone down, first hit wins.
      for (std::size_t k = skeleton.size(); k-- > 0;) {
        const body::Bone& bone = skeleton[k];
        const body::BoneTransform& tf = frames[k];
        const body::Vec2 rel = p - tf.origin;
        const double along = body::dot(rel, tf.axis);
        const double s = std::clamp(along / bone.rest_length, 0.0, 1.0);
        const body::Vec2 nearest = tf.origin + (s * bone.rest_length) * tf.axis;
        if ((p - nearest).norm() > bone.half_width) continue;
        const double d = std::clamp(body::cross(tf.axis, rel) / bone.half_width, -1.0, 1.0);
        const body::UvRect& c = bone.chart;
        const auto idx = static_cast<std::size_t>(y * width + x);
        map.u[idx] = static_cast<float>(c.u0 + s * (c.u1 - c.u0));
        map.v[idx] = static_cast<float>(0.5 * (c.v0 + c.v1) + 0.5 * d * (c.v1 - c.v0));
        map.part[idx] = static_cast<std::uint16_t>(k + 1);
        map.mask[idx] = 1;
        break;
      }
    }
  }
  return map;
}

std::vector<MotionMap> rasterize_sequence(const body::Skeleton& skeleton, const body::PoseSequence& poses,
                                          std::int64_t height, std::int64_t width) {
  std::vector<MotionMap> maps(poses.size());
  parallel_for(static_cast<std::int64_t>(poses.size()), [&](std::int64_t f) {
    maps[static_cast<std::size_t>(f)] =
        rasterize_motion_map(skeleton, poses[static_cast<std::size_t>(f)], height, width);
  });
  return maps;
}

Tensor render_appearance(const MotionMap& map, const Tensor& texture, Rgb background) {
  if (texture.rank() != 3 || texture.dim(2) != 3 || texture.dim(0) < 1 || texture.dim(1) < 1) {
    throw ShapeError("render_appearance: texture must be U x V x 3, got " + shape_string(texture.shape()));
  }
  const std::int64_t tu = texture.dim(0);
  const std::int64_t tv = texture.dim(1);
  Tensor frame(Shape{map.height, map.width, 3});
  for (std::size_t p = 0; p < map.pixels(); ++p) {
    float* px = frame.ptr() + 3 * p;
    if (!map.mask[p]) {
      std::copy(background.begin(), background.end(), px);
      continue;
    }
    const auto t = noise::texel_index(map.u[p], map.v[p], tu, tv);
    const float* texel = texture.ptr() + (t.i * tv + t.j) * 3;
    std::copy(texel, texel + 3, px);
  }
  return frame;
}

Tensor render_video(std::span<const MotionMap> maps, const Tensor& texture, Rgb background) {
  std::vector<Tensor> frames(maps.size());
  parallel_for(static_cast<std::int64_t>(maps.size()), [&](std::int64_t f) {
    frames[static_cast<std::size_t>(f)] = render_appearance(maps[static_cast<std::size_t>(f)], texture, background);
  });
  return stack_frames(frames);
}

Tensor default_appearance_texture(std::int64_t size) {
  static constexpr std::array<Rgb, 12> kPalette = {{
      {0.85f, 0.35f, 0.30f}, {0.95f, 0.80f, 0.60f}, {0.30f, 0.60f, 0.90f}, {0.40f, 0.85f, 0.95f},
      {0.35f, 0.80f, 0.40f}, {0.70f, 0.95f, 0.45f}, {0.90f, 0.70f, 0.20f}, {0.95f, 0.90f, 0.40f},
      {0.75f, 0.40f, 0.85f}, {0.95f, 0.55f, 0.85f}, {0.60f, 0.60f, 0.60f}, {0.80f, 0.80f, 0.80f},
  }};
  Tensor tex(Shape{size, size, 3});
  for (std::int64_t i = 0; i < size; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(size);
    const int col = std::min(3, static_cast<int>(u * 4.0));
    const double s = u * 4.0 - col;
    for (std::int64_t j = 0; j < size; ++j) {
      const double v = (static_cast<double>(j) + 0.5) / static_cast<double>(size);
      const int row = std::min(2, static_cast<int>(v * 3.0));
      const double d = 2.0 * (v * 3.0 - row) - 1.0;
      const Rgb& base = kPalette[static_cast<std::size_t>(row * 4 + col)];
      const double band = 0.8 + 0.2 * std::cos(2.0 * std::numbers::pi * 3.0 * s);
      const double shade = 1.0 - 0.25 * d * d;
      float* px = tex.ptr() + (i * size + j) * 3;
      for (int c = 0; c < 3; ++c) px[c] = static_cast<float>(std::clamp(base[static_cast<std::size_t>(c)] * band * shade, 0.0, 1.0));
    }
  }
  return tex;
}

}  // namespace anw::raster
