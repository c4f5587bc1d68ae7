#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "anw/raster/motion_map.hpp"
#include "anw/raster/rasterizer.hpp"

namespace anw::eval {

/// Mean absolute difference.
double l1(const Tensor& a, const Tensor& b);
/// Mean absolute difference over pixels where mask (frames, H, W) is set,
/// all channels; 0 for an empty mask.
double masked_l1(const Tensor& a, const Tensor& b, const Tensor& mask);

inline constexpr int kSsimWindow = 8;
inline constexpr int kSsimStride = 4;
inline constexpr double kSsimC1 = 1e-4;  // (0.01)^2
inline constexpr double kSsimC2 = 9e-4;  // (0.03)^2

/// Uniform-window SSIM of two (H, W, C) frames on unit dynamic range,
/// averaged over 8x8 windows at stride 4 and over channels. Throws ShapeError
/// for frames smaller than the window.
double ssim(const Tensor& a, const Tensor& b);
/// Mean of per-frame SSIM of two (F, H, W, C) videos.
double ssim_video(const Tensor& a, const Tensor& b);

inline constexpr float kSilhouetteThreshold = 0.05f;

/// (F, H, W) mask of pixels whose largest channel deviation from the
/// background colour exceeds `threshold`.
Tensor silhouette(const Tensor& video, raster::Rgb background = raster::kDefaultBackground,
                  float threshold = kSilhouetteThreshold);
/// Intersection over union of two masks (entries > 0.5 count as set); 1 when
/// both are empty.
double silhouette_iou(const Tensor& a, const Tensor& b);

/// Mean squared difference between consecutive frames after unwarping each
/// frame into a U x V texture; only texels visible in both frames count.
/// 0 when no texel is shared.
double flicker(const Tensor& video, std::span<const raster::MotionMap> maps, std::int64_t U, std::int64_t V);

struct ClipMetrics {
  std::string name;
  double l1 = 0.0;
  double masked_l1 = 0.0;
  double ssim = 0.0;
  double silhouette_iou = 0.0;
  double flicker = 0.0;
};

struct EvalOptions {
  raster::Rgb background = raster::kDefaultBackground;
  float threshold = kSilhouetteThreshold;
  std::int64_t texture_u = 64;
  std::int64_t texture_v = 64;
};

/// Compares a generated video with the ground-truth render of the same clip.
ClipMetrics evaluate_clip(const std::string& name, const Tensor& generated, const Tensor& ground_truth,
                          std::span<const raster::MotionMap> maps, const EvalOptions& options = {});

/// Field-wise mean, named "mean".
ClipMetrics aggregate(std::span<const ClipMetrics> rows);

/// Header, one row per clip, then the aggregate row.
void write_report_csv(std::ostream& os, std::span<const ClipMetrics> rows);

}  // namespace anw::eval
