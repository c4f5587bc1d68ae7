#include <cstring>
#include <memory>

#include "anw/noisefield/noisefield.hpp"

namespace anw::noise {
namespace {

struct Layout {
  std::int64_t frames, height, width, channels;
};

Layout check_layout(const Tensor& noise, std::span<const raster::MotionMap> maps) {
  if (noise.rank() != 4) throw ShapeError("unwarp_fuse: expected (frames, H, W, C), got " + shape_string(noise.shape()));
  const Layout l{noise.dim(0), noise.dim(1), noise.dim(2), noise.dim(3)};
  if (static_cast<std::int64_t>(maps.size()) != l.frames) {
    throw ShapeError("unwarp_fuse: " + std::to_string(maps.size()) + " motion maps for " + std::to_string(l.frames) +
                     " frames");
  }
  for (const auto& m : maps) {
    if (m.height != l.height || m.width != l.width) {
      throw ShapeError("unwarp_fuse: motion map resolution " + std::to_string(m.height) + "x" + std::to_string(m.width) +
                       " does not match noise " + shape_string(noise.shape()));
    }
  }
  return l;
}

/// texel id per (frame, pixel), -1 for background.
std::vector<std::int64_t> texel_lookup(std::span<const raster::MotionMap> maps, std::int64_t U, std::int64_t V) {
  std::vector<std::int64_t> ids;
  for (const auto& m : maps) {
    for (std::size_t p = 0; p < m.pixels(); ++p) {
      if (!m.mask[p]) {
        ids.push_back(-1);
        continue;
      }
      const auto t = texel_index(m.u[p], m.v[p], U, V);
      ids.push_back(t.i * V + t.j);
    }
  }
  return ids;
}

}  // namespace

FusedTexture unwarp_fuse(const Tensor& noise, std::span<const raster::MotionMap> maps, std::int64_t U,
                         std::int64_t V, FuseMode mode) {
  const Layout l = check_layout(noise, maps);
  if (U < 1 || V < 1) throw std::invalid_argument("unwarp_fuse: texture dimensions must be positive");
  const std::int64_t C = l.channels;
  const std::int64_t plane = l.height * l.width;
  const std::int64_t texels = U * V;
  const std::int64_t groups = mode == FuseMode::kJoint ? 1 : l.frames;
  const auto ids = texel_lookup(maps, U, V);

  std::vector<double> acc(static_cast<std::size_t>(groups * texels * C), 0.0);
  std::vector<std::int64_t> count(static_cast<std::size_t>(groups * texels), 0);
  for (std::int64_t f = 0; f < l.frames; ++f) {
    const std::int64_t g = mode == FuseMode::kJoint ? 0 : f;
    for (std::int64_t p = 0; p < plane; ++p) {
      const std::int64_t id = ids[static_cast<std::size_t>(f * plane + p)];
      if (id < 0) continue;
      const float* src = noise.ptr() + (f * plane + p) * C;
      double* dst = acc.data() + (g * texels + id) * C;
      for (std::int64_t c = 0; c < C; ++c) dst[c] += src[c];
      ++count[static_cast<std::size_t>(g * texels + id)];
    }
  }

  FusedTexture out;
  out.values = mode == FuseMode::kJoint ? Tensor(Shape{U, V, C}) : Tensor(Shape{groups, U, V, C});
  out.coverage = mode == FuseMode::kJoint ? Tensor(Shape{U, V}) : Tensor(Shape{groups, U, V});
  for (std::int64_t k = 0; k < groups * texels; ++k) {
    const std::int64_t n = count[static_cast<std::size_t>(k)];
    out.coverage[static_cast<std::size_t>(k)] = static_cast<float>(n);
    if (n == 0) continue;
    for (std::int64_t c = 0; c < C; ++c) {
      out.values[static_cast<std::size_t>(k * C + c)] =
          static_cast<float>(acc[static_cast<std::size_t>(k * C + c)] / static_cast<double>(n));
    }
  }
  return out;
}

FusedVar unwarp_fuse(Var noise, std::span<const raster::MotionMap> maps, std::int64_t U, std::int64_t V) {
  FusedTexture fused = unwarp_fuse(noise.value(), maps, U, V, FuseMode::kJoint);
  const Layout l = check_layout(noise.value(), maps);
  auto ids = std::make_shared<std::vector<std::int64_t>>(texel_lookup(maps, U, V));
  const Tensor coverage = fused.coverage;
  Tape& tape = *noise.tape();
  Var values = tape.record(std::move(fused.values), {noise}, [noise, ids, coverage, l](Tape& t, const Tensor& g) {
    if (!t.requires_grad(noise)) return;
    float* gx = t.grad_buffer(noise).ptr();
    const std::int64_t C = l.channels;
    for (std::size_t k = 0; k < ids->size(); ++k) {
      const std::int64_t id = (*ids)[k];
      if (id < 0) continue;
      const float inv = 1.0f / coverage[static_cast<std::size_t>(id)];
      for (std::int64_t c = 0; c < C; ++c) {
        gx[static_cast<std::int64_t>(k) * C + c] += inv * g[static_cast<std::size_t>(id * C + c)];
      }
    }
  });
  return {values, std::move(coverage)};
}

}  // namespace anw::noise
