#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace anw::noise {

struct TexelIndex {
  std::int64_t i = 0;  // along u
  std::int64_t j = 0;  // along v
  friend bool operator==(TexelIndex, TexelIndex) = default;
};

/// Nearest-texel rule shared by warping, unwarping and appearance lookup:
/// i = min(floor(u*U), U-1), j = min(floor(v*V), V-1). Inputs outside [0,1]
/// are clamped first.
inline TexelIndex texel_index(double u, double v, std::int64_t U, std::int64_t V) {
  u = std::clamp(u, 0.0, 1.0);
  v = std::clamp(v, 0.0, 1.0);
  return {std::min(static_cast<std::int64_t>(std::floor(u * static_cast<double>(U))), U - 1),
          std::min(static_cast<std::int64_t>(std::floor(v * static_cast<double>(V))), V - 1)};
}

}  // namespace anw::noise
