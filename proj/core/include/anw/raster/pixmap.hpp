#pragma once

#include <filesystem>

#include "anw/numeric/tensor.hpp"

namespace anw::raster {

/// Binary portable pixmap (P6, maxval 255) from an (H, W, 3) frame in [0,1].
void write_ppm(const std::filesystem::path& path, const Tensor& frame);

/// Visualizes three channels of an (H, W, C) noise frame: values clamped to
/// [-3, 3] and mapped affinely to [0, 255].
void write_noise_ppm(const std::filesystem::path& path, const Tensor& noise_frame, std::int64_t first_channel = 0);

}  // namespace anw::raster
