#include "anw/raster/motion_map.hpp"

#include <algorithm>
#include <cstring>

namespace anw::raster {

MotionMap::MotionMap(std::int64_t h, std::int64_t w)
    : height(h),
      width(w),
      u(static_cast<std::size_t>(h * w), 0.0f),
      v(static_cast<std::size_t>(h * w), 0.0f),
      part(static_cast<std::size_t>(h * w), 0),
      mask(static_cast<std::size_t>(h * w), 0) {}

std::size_t MotionMap::covered() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

Tensor motion_map_to_tensor(const MotionMap& m) {
  Tensor t(Shape{m.height, m.width, 4});
  for (std::size_t p = 0; p < m.pixels(); ++p) {
    t[4 * p + 0] = m.u[p];
    t[4 * p + 1] = m.v[p];
    t[4 * p + 2] = static_cast<float>(m.part[p]);
    t[4 * p + 3] = static_cast<float>(m.mask[p]);
  }
  return t;
}

MotionMap motion_map_from_tensor(const Tensor& t) {
  if (t.rank() != 3 || t.dim(2) != 4) throw ShapeError("motion map tensor must be H x W x 4");
  MotionMap m(t.dim(0), t.dim(1));
  for (std::size_t p = 0; p < m.pixels(); ++p) {
    m.u[p] = t[4 * p + 0];
    m.v[p] = t[4 * p + 1];
    m.part[p] = static_cast<std::uint16_t>(t[4 * p + 2]);
    m.mask[p] = t[4 * p + 3] > 0.5f ? 1 : 0;
  }
  return m;
}

Tensor motion_maps_to_tensor(std::span<const MotionMap> maps) {
  std::vector<Tensor> frames;
  frames.reserve(maps.size());
  for (const auto& m : maps) frames.push_back(motion_map_to_tensor(m));
  return stack_frames(frames);
}

std::vector<MotionMap> motion_maps_from_tensor(const Tensor& t) {
  if (t.rank() != 4) throw ShapeError("motion map stack must be frames x H x W x 4");
  std::vector<MotionMap> maps;
  for (std::int64_t f = 0; f < t.dim(0); ++f) maps.push_back(motion_map_from_tensor(t.frame(f)));
  return maps;
}

Tensor motion_target(std::span<const MotionMap> maps) {
  if (maps.empty()) throw ShapeError("motion_target: no maps");
  const auto h = maps[0].height;
  const auto w = maps[0].width;
  Tensor t(Shape{static_cast<std::int64_t>(maps.size()), h, w, 3});
  for (std::size_t f = 0; f < maps.size(); ++f) {
    if (maps[f].height != h || maps[f].width != w) throw ShapeError("motion_target: ragged resolutions");
    float* dst = t.ptr() + f * maps[f].pixels() * 3;
    for (std::size_t p = 0; p < maps[f].pixels(); ++p) {
      dst[3 * p + 0] = maps[f].u[p];
      dst[3 * p + 1] = maps[f].v[p];
      dst[3 * p + 2] = static_cast<float>(maps[f].mask[p]);
    }
  }
  return t;
}

Tensor mask_tensor(std::span<const MotionMap> maps) {
  if (maps.empty()) throw ShapeError("mask_tensor: no maps");
  Tensor t(Shape{static_cast<std::int64_t>(maps.size()), maps[0].height, maps[0].width});
  std::size_t k = 0;
  for (const auto& m : maps) {
    if (m.pixels() != maps[0].pixels()) throw ShapeError("mask_tensor: ragged resolutions");
    for (auto bit : m.mask) t[k++] = static_cast<float>(bit);
  }
  return t;
}

}  // namespace anw::raster
