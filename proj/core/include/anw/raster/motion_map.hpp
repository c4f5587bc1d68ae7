#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anw/numeric/tensor.hpp"

namespace anw::raster {

/// Per-pixel record of the visible surface point. Background pixels carry
/// u = v = 0, part = 0, mask = 0; body pixels carry part = bone index + 1.
struct MotionMap {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<float> u;
  std::vector<float> v;
  std::vector<std::uint16_t> part;
  std::vector<std::uint8_t> mask;

  MotionMap() = default;
  MotionMap(std::int64_t h, std::int64_t w);

  std::size_t pixels() const noexcept { return mask.size(); }
  std::size_t covered() const;

  friend bool operator==(const MotionMap&, const MotionMap&) = default;
};

/// H x W x 4 tensor with channels (u, v, part_id, mask).
Tensor motion_map_to_tensor(const MotionMap& m);
MotionMap motion_map_from_tensor(const Tensor& t);

/// (frames, H, W, 4) stack and its inverse.
Tensor motion_maps_to_tensor(std::span<const MotionMap> maps);
std::vector<MotionMap> motion_maps_from_tensor(const Tensor& t);

/// (frames, H, W, 3) regression target (u, v, mask) for the motion decoder.
Tensor motion_target(std::span<const MotionMap> maps);

/// (frames, H, W) body mask as floats.
Tensor mask_tensor(std::span<const MotionMap> maps);

}  // namespace anw::raster
