#include <gtest/gtest.h>

#include <sstream>

#include "anw/body/skeleton.hpp"
#include "anw/eval/metrics.hpp"
#include "anw/numeric/rng.hpp"
#include "oracles.hpp"

using namespace anw;
using namespace anw::eval;

namespace {

std::vector<raster::MotionMap> clip_maps(std::uint64_t seed, int f = 2) {
  const auto s = body::Skeleton::default_humanoid();
  Rng rng(seed);
  return raster::rasterize_sequence(s, body::generate_pose_sequence(s, rng, f, 0.5), 96, 128);
}

Tensor render(const std::vector<raster::MotionMap>& maps, const Tensor& tex) {
  const auto F = static_cast<std::int64_t>(maps.size());
  Tensor v(Shape{F, maps[0].height, maps[0].width, 3});
  for (std::int64_t f = 0; f < F; ++f) {
    const Tensor fr = raster::render_appearance(maps[static_cast<std::size_t>(f)], tex);
    std::copy(fr.data().begin(), fr.data().end(), v.ptr() + f * fr.size());
  }
  return v;
}

// Per-frame texel means by brute force, then the mean squared change over
// texels seen in consecutive frames.
double flicker_oracle(const Tensor& video, const std::vector<raster::MotionMap>& maps, int U, int V) {
  const std::size_t C = 3, texels = static_cast<std::size_t>(U * V);
  std::vector<std::vector<double>> sum(maps.size(), std::vector<double>(texels * C, 0.0));
  std::vector<std::vector<int>> count(maps.size(), std::vector<int>(texels, 0));
  for (std::size_t f = 0; f < maps.size(); ++f) {
    const auto& m = maps[f];
    for (std::size_t p = 0; p < m.pixels(); ++p) {
      if (!m.mask[p]) continue;
      const int i = std::min(static_cast<int>(std::floor(double(m.u[p]) * U)), U - 1);
      const int j = std::min(static_cast<int>(std::floor(double(m.v[p]) * V)), V - 1);
      const std::size_t k = static_cast<std::size_t>(i * V + j);
      ++count[f][k];
      for (std::size_t c = 0; c < C; ++c) sum[f][k * C + c] += video[(f * m.pixels() + p) * C + c];
    }
  }
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t f = 0; f + 1 < maps.size(); ++f) {
    for (std::size_t k = 0; k < texels; ++k) {
      if (!count[f][k] || !count[f + 1][k]) continue;
      for (std::size_t c = 0; c < C; ++c) {
        const double d = sum[f][k * C + c] / count[f][k] - sum[f + 1][k * C + c] / count[f + 1][k];
        acc += d * d;
        ++n;
      }
    }
  }
  return n ? acc / static_cast<double>(n) : 0.0;
}

}  // namespace

TEST(L1, ExamplesAndOracle) {
  EXPECT_EQ(l1(Tensor(Shape{2, 3}, 0.0f), Tensor(Shape{2, 3}, 1.0f)), 1.0);
  std::mt19937 gen(1);
  const Tensor a = oracle::uniform_tensor(gen, {3, 8, 8, 3}, 0, 1);
  const Tensor b = oracle::uniform_tensor(gen, {3, 8, 8, 3}, 0, 1);
  EXPECT_EQ(l1(a, a), 0.0);
  EXPECT_NEAR(l1(a, b), oracle::mean_abs(a, b), 1e-12);
  EXPECT_EQ(l1(a, b), l1(b, a));
  EXPECT_THROW(l1(a, Tensor(Shape{3, 8, 8, 2})), ShapeError);
}

TEST(L1, MaskedOverSetPixelsOnly) {
  Tensor a(Shape{1, 2, 2, 3}, 0.0f), b(Shape{1, 2, 2, 3}, 0.0f);
  Tensor mask(Shape{1, 2, 2}, 0.0f);
  EXPECT_EQ(masked_l1(a, b, mask), 0.0);
  for (int c = 0; c < 3; ++c) b[static_cast<std::size_t>(3 + c)] = 0.6f;  // pixel 1
  for (int c = 0; c < 3; ++c) b[static_cast<std::size_t>(6 + c)] = 9.0f;  // pixel 2, unmasked
  mask[0] = 1.0f;
  mask[1] = 1.0f;
  EXPECT_NEAR(masked_l1(a, b, mask), 0.3, 1e-7);
}

TEST(Ssim, IdenticalFramesScoreOne) {
  std::mt19937 gen(2);
  const Tensor a = oracle::uniform_tensor(gen, {24, 32, 3}, 0, 1);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(Ssim, ConstantFramesMatchClosedForm) {
  const Tensor a(Shape{16, 16, 3}, 0.0f), b(Shape{16, 16, 3}, 1.0f);
  EXPECT_NEAR(ssim(a, b), oracle::ssim_window(0, 1, 0, 0, 0), 1e-12);
  EXPECT_NEAR(ssim(a, b), 1e-4 / (1 + 1e-4), 1e-12);
}

TEST(Ssim, MatchesWindowOracle) {
  std::mt19937 gen(3);
  const Tensor a = oracle::uniform_tensor(gen, {16, 20, 2}, 0, 1);
  const Tensor b = oracle::uniform_tensor(gen, {16, 20, 2}, 0, 1);
  double total = 0.0;
  int windows = 0;
  for (int c = 0; c < 2; ++c) {
    for (int y0 = 0; y0 + 8 <= 16; y0 += 4) {
      for (int x0 = 0; x0 + 8 <= 20; x0 += 4) {
        std::vector<double> xa, xb;
        for (int y = y0; y < y0 + 8; ++y) {
          for (int x = x0; x < x0 + 8; ++x) {
            xa.push_back(a[static_cast<std::size_t>((y * 20 + x) * 2 + c)]);
            xb.push_back(b[static_cast<std::size_t>((y * 20 + x) * 2 + c)]);
          }
        }
        double ma = 0, mb = 0;
        for (std::size_t i = 0; i < 64; ++i) ma += xa[i] / 64, mb += xb[i] / 64;
        double va = 0, vb = 0, cov = 0;
        for (std::size_t i = 0; i < 64; ++i) {
          va += (xa[i] - ma) * (xa[i] - ma) / 64;
          vb += (xb[i] - mb) * (xb[i] - mb) / 64;
          cov += (xa[i] - ma) * (xb[i] - mb) / 64;
        }
        total += oracle::ssim_window(ma, mb, va, vb, cov);
        ++windows;
      }
    }
  }
  EXPECT_EQ(windows, 2 * 3 * 4);
  EXPECT_NEAR(ssim(a, b), total / windows, 1e-9);
}

TEST(Ssim, SmallNoiseStaysNearOne) {
  std::mt19937 gen(4);
  const Tensor a = oracle::uniform_tensor(gen, {32, 32, 3}, 0.1f, 0.9f);
  Tensor b = a;
  std::normal_distribution<float> n(0.0f, 1e-3f);
  for (float& x : b.data()) x += n(gen);
  EXPECT_GT(ssim(a, b), 0.99);
  EXPECT_LT(ssim(a, b), 1.0);
}

TEST(Ssim, VideoAveragesFramesAndRejectsSmallFrames) {
  std::mt19937 gen(5);
  const Tensor a = oracle::uniform_tensor(gen, {2, 8, 8, 1}, 0, 1);
  const Tensor b = oracle::uniform_tensor(gen, {2, 8, 8, 1}, 0, 1);
  EXPECT_NEAR(ssim_video(a, b), 0.5 * (ssim(a.frame(0), b.frame(0)) + ssim(a.frame(1), b.frame(1))), 1e-12);
  EXPECT_THROW(ssim(Tensor(Shape{7, 8, 1}), Tensor(Shape{7, 8, 1})), ShapeError);
}

TEST(Silhouette, ThresholdAgainstBackground) {
  Tensor v(Shape{1, 1, 3, 3});
  const raster::Rgb bg{0.2f, 0.2f, 0.2f};
  const float px[3][3] = {{0.2f, 0.2f, 0.2f}, {0.24f, 0.2f, 0.17f}, {0.2f, 0.26f, 0.2f}};
  for (int p = 0; p < 3; ++p) {
    for (int c = 0; c < 3; ++c) v[static_cast<std::size_t>(3 * p + c)] = px[p][c];
  }
  const Tensor m = silhouette(v, bg, 0.05f);
  EXPECT_EQ(m[0], 0.0f);
  EXPECT_EQ(m[1], 0.0f);
  EXPECT_EQ(m[2], 1.0f);
}

TEST(Silhouette, IouExamples) {
  Tensor a(Shape{1, 2, 3}, 0.0f), b(Shape{1, 2, 3}, 0.0f);
  EXPECT_EQ(silhouette_iou(a, b), 1.0);
  a[0] = a[1] = 1.0f;
  EXPECT_EQ(silhouette_iou(a, a), 1.0);
  b[2] = b[3] = 1.0f;
  EXPECT_EQ(silhouette_iou(a, b), 0.0);
  b[2] = 0.0f;
  b[1] = 1.0f;  // a = {0,1}, b = {1,3}
  EXPECT_NEAR(silhouette_iou(a, b), 1.0 / 3.0, 1e-15);
}

TEST(Flicker, StaticAndGroundTruthRendersAreZero) {
  const auto maps = clip_maps(11);
  std::mt19937 gen(6);
  const Tensor tex = oracle::uniform_tensor(gen, {64, 64, 3}, 0, 1);
  const Tensor gt = render(maps, tex);
  EXPECT_NEAR(flicker(gt, maps, 64, 64), 0.0, 1e-6);

  const std::vector<raster::MotionMap> frozen(5, maps[0]);
  const Tensor still = render(frozen, tex);
  EXPECT_EQ(flicker(still, frozen, 64, 64), 0.0);

  const std::vector<raster::MotionMap> empty(3, raster::MotionMap(96, 128));
  EXPECT_EQ(flicker(Tensor(Shape{3, 96, 128, 3}, 0.5f), empty, 64, 64), 0.0);
}

TEST(Flicker, MatchesBruteForceOnNoise) {
  const auto maps = clip_maps(12);
  std::mt19937 gen(7);
  const Tensor v = oracle::normal_tensor(gen, {9, 96, 128, 3});
  const double want = flicker_oracle(v, maps, 64, 64);
  EXPECT_GT(want, 0.0);
  EXPECT_NEAR(flicker(v, maps, 64, 64), want, 1e-6 * want);
  EXPECT_THROW(flicker(v, std::span(maps).first(8), 64, 64), ShapeError);
}

// With one pixel per texel an i.i.d. video flickers by twice its variance.
TEST(Flicker, IidSinglePixelTexelsGiveTwiceTheVariance) {
  const std::size_t F = 2;
  std::vector<raster::MotionMap> maps(F, raster::MotionMap(96, 128));
  for (auto& m : maps) {
    for (std::size_t p = 0; p < m.pixels(); ++p) {
      m.mask[p] = 1;
      m.part[p] = 1;
      m.u[p] = static_cast<float>((static_cast<double>(p / 128) + 0.5) / 96.0);
      m.v[p] = static_cast<float>((static_cast<double>(p % 128) + 0.5) / 128.0);
    }
  }
  std::mt19937 gen(8);
  Tensor v = oracle::normal_tensor(gen, {2, 96, 128, 3});
  for (float& x : v.data()) x *= 0.5f;
  EXPECT_NEAR(flicker(v, maps, 96, 128), 2 * 0.25, 0.02);
}

TEST(Report, EvaluateAggregateAndCsv) {
  const auto maps = clip_maps(13);
  std::mt19937 gen(9);
  const Tensor tex = oracle::uniform_tensor(gen, {64, 64, 3}, 0, 1);
  const Tensor gt = render(maps, tex);
  const auto same = evaluate_clip("a", gt, gt, maps);
  EXPECT_EQ(same.l1, 0.0);
  EXPECT_EQ(same.masked_l1, 0.0);
  EXPECT_NEAR(same.ssim, 1.0, 1e-12);
  EXPECT_EQ(same.silhouette_iou, 1.0);

  Tensor off = gt;
  for (float& x : off.data()) x = std::min(1.0f, x + 0.1f);
  const auto shifted = evaluate_clip("b", off, gt, maps);
  EXPECT_GT(shifted.l1, 0.0);

  const std::vector<ClipMetrics> rows{same, shifted};
  const auto mean = aggregate(rows);
  EXPECT_EQ(mean.name, "mean");
  EXPECT_DOUBLE_EQ(mean.l1, 0.5 * shifted.l1);
  EXPECT_DOUBLE_EQ(mean.silhouette_iou, 0.5 * (1.0 + shifted.silhouette_iou));

  std::ostringstream os;
  write_report_csv(os, rows);
  std::istringstream is(os.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(is, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), rows.size() + 2);  // header, clips, mean
  EXPECT_EQ(lines[0], "clip,l1,masked_l1,ssim,silhouette_iou,flicker");
  EXPECT_EQ(lines[1].substr(0, 2), "a,");
  EXPECT_EQ(lines.back().substr(0, 5), "mean,");
}
