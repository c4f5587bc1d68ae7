#include "anw/diffusion/codec.hpp"

#include <algorithm>
#include <string>

namespace anw::diffusion {

std::vector<std::int64_t> LatentCodec::frame_layout(std::int64_t latent_frames) const {
  std::vector<std::int64_t> layout{0};
  for (std::int64_t k = 1; k < latent_frames; ++k) {
    for (std::int64_t i = 0; i < temporal; ++i) layout.push_back(k);
  }
  return layout;
}

Tensor LatentCodec::encode(const Tensor& video) const {
  if (video.rank() != 4 || video.dim(3) != 3) throw ShapeError("encode: expected (frames, H, W, 3), got " + shape_string(video.shape()));
  if (channels < 3) throw ShapeError("encode: latent needs at least 3 channels");
  const std::int64_t F = video.dim(0);
  const std::int64_t H = video.dim(1);
  const std::int64_t W = video.dim(2);
  if (H % spatial != 0 || W % spatial != 0) throw ShapeError("encode: H, W must be divisible by " + std::to_string(spatial));
  if (F < 1 || (F - 1) % temporal != 0) throw ShapeError("encode: frame count must be 1 mod " + std::to_string(temporal));
  const std::int64_t lf = (F - 1) / temporal + 1;
  const std::int64_t h = H / spatial;
  const std::int64_t w = W / spatial;
  const auto layout = frame_layout(lf);

  std::vector<double> acc(static_cast<std::size_t>(lf * h * w * 3), 0.0);
  std::vector<std::int64_t> frames_in(static_cast<std::size_t>(lf), 0);
  for (std::int64_t f = 0; f < F; ++f) {
    const std::int64_t k = layout[static_cast<std::size_t>(f)];
    ++frames_in[static_cast<std::size_t>(k)];
    for (std::int64_t y = 0; y < H; ++y) {
      for (std::int64_t x = 0; x < W; ++x) {
        const float* px = video.ptr() + ((f * H + y) * W + x) * 3;
        double* dst = acc.data() + ((k * h + y / spatial) * w + x / spatial) * 3;
        for (int c = 0; c < 3; ++c) dst[c] += px[c];
      }
    }
  }
  Tensor out(Shape{lf, h, w, channels});
  const double block = static_cast<double>(spatial * spatial);
  for (std::int64_t k = 0; k < lf; ++k) {
    const double norm = 1.0 / (block * static_cast<double>(frames_in[static_cast<std::size_t>(k)]));
    for (std::int64_t p = 0; p < h * w; ++p) {
      for (int c = 0; c < 3; ++c) {
        out[static_cast<std::size_t>((k * h * w + p) * channels + c)] =
            static_cast<float>(acc[static_cast<std::size_t>((k * h * w + p) * 3 + c)] * norm);
      }
    }
  }
  return out;
}

Tensor LatentCodec::encode_frame(const Tensor& frame) const {
  if (frame.rank() != 3) throw ShapeError("encode_frame: expected (H, W, 3)");
  return encode(frame.reshaped(Shape{1, frame.dim(0), frame.dim(1), frame.dim(2)})).frame(0);
}

Tensor LatentCodec::decode(const Tensor& latent) const {
  if (latent.rank() != 4 || latent.dim(3) < 3) throw ShapeError("decode: expected (frames, h, w, C>=3), got " + shape_string(latent.shape()));
  const std::int64_t lf = latent.dim(0);
  const std::int64_t h = latent.dim(1);
  const std::int64_t w = latent.dim(2);
  const std::int64_t C = latent.dim(3);
  const auto layout = frame_layout(lf);
  const auto F = static_cast<std::int64_t>(layout.size());
  const std::int64_t H = h * spatial;
  const std::int64_t W = w * spatial;
  Tensor out(Shape{F, H, W, 3});
  for (std::int64_t f = 0; f < F; ++f) {
    const std::int64_t k = layout[static_cast<std::size_t>(f)];
    for (std::int64_t y = 0; y < H; ++y) {
      for (std::int64_t x = 0; x < W; ++x) {
        const float* src = latent.ptr() + ((k * h + y / spatial) * w + x / spatial) * C;
        float* dst = out.ptr() + ((f * H + y) * W + x) * 3;
        for (int c = 0; c < 3; ++c) dst[c] = std::clamp(src[c], 0.0f, 1.0f);
      }
    }
  }
  return out;
}

Tensor LatentCodec::normalize(const Tensor& latent) const {
  if (latent.rank() == 0 || latent.dim(latent.rank() - 1) != channels) throw ShapeError("normalize: last axis must be C");
  Tensor out = latent;
  const auto C = static_cast<std::size_t>(channels);
  const auto scale = static_cast<float>(latent_scale), shift = static_cast<float>(latent_shift);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * (i % C < 3 ? out[i] - shift : out[i]);
  return out;
}

Tensor LatentCodec::denormalize(const Tensor& z) const {
  if (z.rank() == 0 || z.dim(z.rank() - 1) != channels) throw ShapeError("denormalize: last axis must be C");
  Tensor out = z;
  const auto C = static_cast<std::size_t>(channels);
  const auto scale = static_cast<float>(latent_scale), shift = static_cast<float>(latent_shift);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i % C < 3 ? out[i] / scale + shift : out[i] / scale;
  return out;
}

}  // namespace anw::diffusion
