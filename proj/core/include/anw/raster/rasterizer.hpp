#pragma once

#include <array>
#include <span>
#include <vector>

#include "anw/body/skeleton.hpp"
#include "anw/raster/motion_map.hpp"

namespace anw::raster {

using Rgb = std::array<float, 3>;

inline constexpr Rgb kDefaultBackground = {0.12f, 0.14f, 0.18f};

/// Point-in-capsule test at every pixel centre. Among bones containing the
/// pixel the highest index wins; its (arc fraction s, transverse fraction d)
/// maps through the bone chart to (u, v). Throws for H or W below 8.
MotionMap rasterize_motion_map(const body::Skeleton& skeleton, const body::Pose& pose, std::int64_t height,
                               std::int64_t width);

std::vector<MotionMap> rasterize_sequence(const body::Skeleton& skeleton, const body::PoseSequence& poses,
                                          std::int64_t height, std::int64_t width);

/// (H, W, 3) frame: body pixels take the nearest texel of `texture`
/// (shape (U, V, 3)), background pixels the background colour.
Tensor render_appearance(const MotionMap& map, const Tensor& texture, Rgb background = kDefaultBackground);

/// (frames, H, W, 3) video of render_appearance over a sequence.
Tensor render_video(std::span<const MotionMap> maps, const Tensor& texture, Rgb background = kDefaultBackground);

/// Procedural appearance atlas (size x size x 3): one hue per chart cell of
/// the default 4x3 grid, banded along u and shaded across v.
Tensor default_appearance_texture(std::int64_t size = 64);

}  // namespace anw::raster
