#include "anw/raster/pixmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

namespace anw::raster {
namespace {

void write_p6(const std::filesystem::path& path, std::int64_t h, std::int64_t w, const std::vector<unsigned char>& rgb) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "P6\n" << w << ' ' << h << "\n255\n";
  os.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const Tensor& frame) {
  if (frame.rank() != 3 || frame.dim(2) != 3) throw ShapeError("write_ppm: expected H x W x 3");
  std::vector<unsigned char> rgb(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) {
    rgb[i] = static_cast<unsigned char>(std::lround(std::clamp(frame[i], 0.0f, 1.0f) * 255.0f));
  }
  write_p6(path, frame.dim(0), frame.dim(1), rgb);
}

void write_noise_ppm(const std::filesystem::path& path, const Tensor& noise_frame, std::int64_t first_channel) {
  if (noise_frame.rank() != 3) throw ShapeError("write_noise_ppm: expected H x W x C");
  const std::int64_t c = noise_frame.dim(2);
  const std::int64_t pixels = noise_frame.dim(0) * noise_frame.dim(1);
  std::vector<unsigned char> rgb(static_cast<std::size_t>(pixels * 3));
  for (std::int64_t p = 0; p < pixels; ++p) {
    for (std::int64_t k = 0; k < 3; ++k) {
      const std::int64_t ch = (first_channel + k) % c;
      const float x = std::clamp(noise_frame[static_cast<std::size_t>(p * c + ch)], -3.0f, 3.0f);
      rgb[static_cast<std::size_t>(p * 3 + k)] = static_cast<unsigned char>(std::lround((x + 3.0f) / 6.0f * 255.0f));
    }
  }
  write_p6(path, noise_frame.dim(0), noise_frame.dim(1), rgb);
}

}  // namespace anw::raster
