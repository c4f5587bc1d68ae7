#include "anw/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "anw/noisefield/noisefield.hpp"

namespace anw::eval {

double l1(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "l1");
  if (a.size() == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(static_cast<double>(a[i]) - b[i]);
  return acc / static_cast<double>(a.size());
}

double masked_l1(const Tensor& a, const Tensor& b, const Tensor& mask) {
  require_same_shape(a, b, "masked_l1");
  if (a.rank() < 1 || mask.size() * static_cast<std::size_t>(a.dim(-1)) != a.size()) {
    throw ShapeError("masked_l1: mask " + shape_string(mask.shape()) + " does not match " + shape_string(a.shape()));
  }
  const auto channels = static_cast<std::size_t>(a.dim(-1));
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mask[i / channels] <= 0.5f) continue;
    acc += std::abs(static_cast<double>(a[i]) - b[i]);
    ++n;
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

double ssim(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "ssim");
  if (a.rank() != 3) throw ShapeError("ssim: frames must be (H, W, C), got " + shape_string(a.shape()));
  const std::int64_t H = a.dim(0), W = a.dim(1), C = a.dim(2);
  if (H < kSsimWindow || W < kSsimWindow) {
    throw ShapeError("ssim: frame " + shape_string(a.shape()) + " smaller than the 8x8 window");
  }
  constexpr double n = kSsimWindow * kSsimWindow;
  double total = 0.0;
  std::int64_t windows = 0;
  for (std::int64_t c = 0; c < C; ++c) {
    for (std::int64_t y0 = 0; y0 + kSsimWindow <= H; y0 += kSsimStride) {
      for (std::int64_t x0 = 0; x0 + kSsimWindow <= W; x0 += kSsimStride) {
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        for (std::int64_t y = y0; y < y0 + kSsimWindow; ++y) {
          for (std::int64_t x = x0; x < x0 + kSsimWindow; ++x) {
            const auto idx = static_cast<std::size_t>((y * W + x) * C + c);
            const double va = a[idx], vb = b[idx];
            sa += va;
            sb += vb;
            saa += va * va;
            sbb += vb * vb;
            sab += va * vb;
          }
        }
        const double ma = sa / n, mb = sb / n;
        const double va = std::max(0.0, saa / n - ma * ma);
        const double vb = std::max(0.0, sbb / n - mb * mb);
        const double cov = sab / n - ma * mb;
        total += ((2 * ma * mb + kSsimC1) * (2 * cov + kSsimC2)) /
                 ((ma * ma + mb * mb + kSsimC1) * (va + vb + kSsimC2));
        ++windows;
      }
    }
  }
  return total / static_cast<double>(windows);
}

double ssim_video(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "ssim_video");
  if (a.rank() != 4) throw ShapeError("ssim_video: videos must be (F, H, W, C)");
  double acc = 0.0;
  for (std::int64_t f = 0; f < a.dim(0); ++f) acc += ssim(a.frame(f), b.frame(f));
  return acc / static_cast<double>(a.dim(0));
}

Tensor silhouette(const Tensor& video, raster::Rgb background, float threshold) {
  if (video.rank() != 4 || video.dim(3) != 3) throw ShapeError("silhouette: video must be (F, H, W, 3)");
  Tensor mask(Shape{video.dim(0), video.dim(1), video.dim(2)});
  for (std::size_t p = 0; p < mask.size(); ++p) {
    float dev = 0.0f;
    for (std::size_t c = 0; c < 3; ++c) dev = std::max(dev, std::abs(video[3 * p + c] - background[c]));
    mask[p] = dev > threshold ? 1.0f : 0.0f;
  }
  return mask;
}

double silhouette_iou(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "silhouette_iou");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] > 0.5f, y = b[i] > 0.5f;
    inter += (x && y) ? 1 : 0;
    uni += (x || y) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double flicker(const Tensor& video, std::span<const raster::MotionMap> maps, std::int64_t U, std::int64_t V) {
  if (video.rank() != 4 || static_cast<std::size_t>(video.dim(0)) != maps.size()) {
    throw ShapeError("flicker: video frames and motion maps disagree");
  }
  const auto fused = noise::unwarp_fuse(video, maps, U, V, noise::FuseMode::kPerFrame);
  const auto C = static_cast<std::size_t>(video.dim(3));
  const auto texels = static_cast<std::size_t>(U * V);
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t f = 0; f + 1 < maps.size(); ++f) {
    for (std::size_t k = 0; k < texels; ++k) {
      if (fused.coverage[f * texels + k] < 1.0f || fused.coverage[(f + 1) * texels + k] < 1.0f) continue;
      for (std::size_t c = 0; c < C; ++c) {
        const double d = static_cast<double>(fused.values[(f * texels + k) * C + c]) - fused.values[((f + 1) * texels + k) * C + c];
        acc += d * d;
      }
      n += C;
    }
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

ClipMetrics evaluate_clip(const std::string& name, const Tensor& generated, const Tensor& ground_truth,
                          std::span<const raster::MotionMap> maps, const EvalOptions& options) {
  require_same_shape(generated, ground_truth, "evaluate_clip");
  ClipMetrics m;
  m.name = name;
  m.l1 = l1(generated, ground_truth);
  m.masked_l1 = masked_l1(generated, ground_truth, raster::mask_tensor(maps));
  m.ssim = ssim_video(generated, ground_truth);
  m.silhouette_iou = silhouette_iou(silhouette(generated, options.background, options.threshold),
                                    silhouette(ground_truth, options.background, options.threshold));
  m.flicker = flicker(generated, maps, options.texture_u, options.texture_v);
  return m;
}

ClipMetrics aggregate(std::span<const ClipMetrics> rows) {
  ClipMetrics m;
  m.name = "mean";
  if (rows.empty()) return m;
  for (const auto& r : rows) {
    m.l1 += r.l1;
    m.masked_l1 += r.masked_l1;
    m.ssim += r.ssim;
    m.silhouette_iou += r.silhouette_iou;
    m.flicker += r.flicker;
  }
  const double n = static_cast<double>(rows.size());
  m.l1 /= n;
  m.masked_l1 /= n;
  m.ssim /= n;
  m.silhouette_iou /= n;
  m.flicker /= n;
  return m;
}

void write_report_csv(std::ostream& os, std::span<const ClipMetrics> rows) {
  os << "clip,l1,masked_l1,ssim,silhouette_iou,flicker\n";
  auto row = [&](const ClipMetrics& m) {
    os << m.name << ',' << std::setprecision(9) << m.l1 << ',' << m.masked_l1 << ',' << m.ssim << ','
       << m.silhouette_iou << ',' << m.flicker << '\n';
  };
  for (const auto& r : rows) row(r);
  row(aggregate(rows));
}

}  // namespace anw::eval
