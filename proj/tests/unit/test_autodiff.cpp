#include <gtest/gtest.h>

#include <functional>

#include "anw/body/skeleton.hpp"
#include "anw/diffusion/schedule.hpp"
#include "anw/noisefield/noisefield.hpp"
#include "anw/numeric/ops.hpp"
#include "anw/raster/rasterizer.hpp"
#include "oracles.hpp"

using namespace anw;

// Every case pairs a taped float32 builder with a plain double-precision
// reference written here. Central differences run on the reference, so the
// numeric side carries no float32 round-off, and the forward values of both
// are compared as well.

namespace {

struct D {
  Shape shape;
  std::vector<double> v;
  D() = default;
  D(Shape s) : shape(std::move(s)), v(static_cast<std::size_t>(numel(shape)), 0.0) {}
  static D from(const Tensor& t) {
    D d(t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) d.v[i] = t[i];
    return d;
  }
  static std::int64_t numel(const Shape& s) {
    std::int64_t n = 1;
    for (auto x : s) n *= x;
    return n;
  }
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  std::size_t size() const { return v.size(); }
};

using Builder = std::function<Var(Tape&, const std::vector<Var>&)>;
using Reference = std::function<D(const std::vector<D>&)>;

namespace ref {

D map(const D& a, const std::function<double(double)>& f) {
  D o(a.shape);
  for (std::size_t i = 0; i < a.size(); ++i) o[i] = f(a[i]);
  return o;
}

D zip(const D& a, const D& b, const std::function<double(double, double)>& f) {
  D o(a.shape);
  for (std::size_t i = 0; i < a.size(); ++i) o[i] = f(a[i], b[i]);
  return o;
}

D scalar(double s) {
  D o(Shape{});
  o.v.assign(1, s);
  return o;
}

double total(const D& a) {
  double s = 0.0;
  for (double x : a.v) s += x;
  return s;
}

D linear(const D& x, const D& w, const D& b) {
  const auto rows = x.shape[0], n = x.shape[1], m = w.shape[1];
  D o(Shape{rows, m});
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t j = 0; j < m; ++j) {
      double s = b[static_cast<std::size_t>(j)];
      for (std::int64_t i = 0; i < n; ++i) s += x[static_cast<std::size_t>(r * n + i)] * w[static_cast<std::size_t>(i * m + j)];
      o[static_cast<std::size_t>(r * m + j)] = s;
    }
  return o;
}

// x (F, H, W, Ci), w (3, 3, Ci, Co), zero padding.
D conv3x3(const D& x, const D& w, const D& b) {
  const auto F = x.shape[0], H = x.shape[1], W = x.shape[2], Ci = x.shape[3], Co = w.shape[3];
  D o(Shape{F, H, W, Co});
  for (std::int64_t f = 0; f < F; ++f)
    for (std::int64_t y = 0; y < H; ++y)
      for (std::int64_t xx = 0; xx < W; ++xx)
        for (std::int64_t co = 0; co < Co; ++co) {
          double s = b[static_cast<std::size_t>(co)];
          for (std::int64_t ky = 0; ky < 3; ++ky)
            for (std::int64_t kx = 0; kx < 3; ++kx) {
              const auto sy = y + ky - 1, sx = xx + kx - 1;
              if (sy < 0 || sy >= H || sx < 0 || sx >= W) continue;
              for (std::int64_t ci = 0; ci < Ci; ++ci) {
                s += x[static_cast<std::size_t>(((f * H + sy) * W + sx) * Ci + ci)] *
                     w[static_cast<std::size_t>(((ky * 3 + kx) * Ci + ci) * Co + co)];
              }
            }
          o[static_cast<std::size_t>(((f * H + y) * W + xx) * Co + co)] = s;
        }
  return o;
}

// Mixes frames f-1, f, f+1 per pixel; w (3, Ci, Co).
D temporal_conv3(const D& x, const D& w, const D& b) {
  const auto F = x.shape[0], P = x.shape[1] * x.shape[2], Ci = x.shape[3], Co = w.shape[2];
  D o(Shape{F, x.shape[1], x.shape[2], Co});
  for (std::int64_t f = 0; f < F; ++f)
    for (std::int64_t p = 0; p < P; ++p)
      for (std::int64_t co = 0; co < Co; ++co) {
        double s = b[static_cast<std::size_t>(co)];
        for (std::int64_t k = 0; k < 3; ++k) {
          const auto sf = f + k - 1;
          if (sf < 0 || sf >= F) continue;
          for (std::int64_t ci = 0; ci < Ci; ++ci)
            s += x[static_cast<std::size_t>((sf * P + p) * Ci + ci)] * w[static_cast<std::size_t>((k * Ci + ci) * Co + co)];
        }
        o[static_cast<std::size_t>((f * P + p) * Co + co)] = s;
      }
  return o;
}

D add_channel_bias(const D& x, const D& b) {
  D o = x;
  const auto C = static_cast<std::size_t>(x.shape.back());
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += b[i % C];
  return o;
}

D avg_pool2(const D& x) {
  const auto F = x.shape[0], H = x.shape[1], W = x.shape[2], C = x.shape[3];
  D o(Shape{F, H / 2, W / 2, C});
  for (std::int64_t f = 0; f < F; ++f)
    for (std::int64_t y = 0; y < H; ++y)
      for (std::int64_t xx = 0; xx < W; ++xx)
        for (std::int64_t c = 0; c < C; ++c)
          o[static_cast<std::size_t>(((f * (H / 2) + y / 2) * (W / 2) + xx / 2) * C + c)] +=
              0.25 * x[static_cast<std::size_t>(((f * H + y) * W + xx) * C + c)];
  return o;
}

D upsample(const D& x, std::int64_t k) {
  const auto F = x.shape[0], H = x.shape[1], W = x.shape[2], C = x.shape[3];
  D o(Shape{F, H * k, W * k, C});
  for (std::int64_t f = 0; f < F; ++f)
    for (std::int64_t y = 0; y < H * k; ++y)
      for (std::int64_t xx = 0; xx < W * k; ++xx)
        for (std::int64_t c = 0; c < C; ++c)
          o[static_cast<std::size_t>(((f * H * k + y) * W * k + xx) * C + c)] =
              x[static_cast<std::size_t>(((f * H + y / k) * W + xx / k) * C + c)];
  return o;
}

D concat(const D& a, const D& b) {
  const auto Ca = a.shape[3], Cb = b.shape[3];
  D o(Shape{a.shape[0], a.shape[1], a.shape[2], Ca + Cb});
  const auto pixels = a.shape[0] * a.shape[1] * a.shape[2];
  for (std::int64_t p = 0; p < pixels; ++p) {
    for (std::int64_t c = 0; c < Ca; ++c) o[static_cast<std::size_t>(p * (Ca + Cb) + c)] = a[static_cast<std::size_t>(p * Ca + c)];
    for (std::int64_t c = 0; c < Cb; ++c)
      o[static_cast<std::size_t>(p * (Ca + Cb) + Ca + c)] = b[static_cast<std::size_t>(p * Cb + c)];
  }
  return o;
}

D gather(const D& x, const std::vector<std::int64_t>& idx) {
  Shape s = x.shape;
  s[0] = static_cast<std::int64_t>(idx.size());
  D o(s);
  const auto frame = x.size() / static_cast<std::size_t>(x.shape[0]);
  for (std::size_t k = 0; k < idx.size(); ++k)
    for (std::size_t i = 0; i < frame; ++i) o[k * frame + i] = x[static_cast<std::size_t>(idx[k]) * frame + i];
  return o;
}

D instance_norm(const D& x, const D& g, const D& b, double eps = 1e-5) {
  const auto F = x.shape[0], P = x.shape[1] * x.shape[2], C = x.shape[3];
  D o(x.shape);
  for (std::int64_t f = 0; f < F; ++f)
    for (std::int64_t c = 0; c < C; ++c) {
      double mu = 0.0, var = 0.0;
      for (std::int64_t p = 0; p < P; ++p) mu += x[static_cast<std::size_t>((f * P + p) * C + c)];
      mu /= static_cast<double>(P);
      for (std::int64_t p = 0; p < P; ++p) var += std::pow(x[static_cast<std::size_t>((f * P + p) * C + c)] - mu, 2);
      var /= static_cast<double>(P);
      for (std::int64_t p = 0; p < P; ++p) {
        const auto i = static_cast<std::size_t>((f * P + p) * C + c);
        o[i] = g[static_cast<std::size_t>(c)] * (x[i] - mu) / std::sqrt(var + eps) + b[static_cast<std::size_t>(c)];
      }
    }
  return o;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double mse(const D& a, const D& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace ref

struct FdResult {
  double max_rel_error = 0.0;
  double max_forward_error = 0.0;
  std::size_t compared = 0;
};

// Scalarizes y with a fixed random projection r; the analytic side is the
// tape adjoint of sum(r * y) in float32, the numeric side a central
// difference of sum(r * y_ref) in double.
FdResult finite_difference(const std::vector<Tensor>& inputs, const Builder& build, const Reference& reference,
                           std::uint32_t seed, double step = 1e-3, double floor = 1e-5) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.parameter(t));
  Var y = build(tape, vars);
  std::mt19937 gen(seed);
  const Tensor proj = oracle::uniform_tensor(gen, y.shape());
  tape.backward(ops::sum(ops::mul(y, tape.constant(proj))));

  std::vector<D> x;
  for (const auto& t : inputs) x.push_back(D::from(t));
  auto projected = [&]() {
    const D out = reference(x);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += proj[i] * out[i];
    return s;
  };

  FdResult r;
  const D y_ref = reference(x);
  EXPECT_EQ(y_ref.size(), y.value().size());
  for (std::size_t i = 0; i < y_ref.size() && i < y.value().size(); ++i) {
    r.max_forward_error =
        std::max(r.max_forward_error, std::abs(y_ref[i] - y.value()[i]) / std::max(1.0, std::abs(y_ref[i])));
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    for (std::size_t i = 0; i < x[k].size(); ++i) {
      const double saved = x[k][i];
      x[k][i] = saved + step;
      const double up = projected();
      x[k][i] = saved - step;
      const double down = projected();
      x[k][i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = tape.grad(vars[k])[i];
      const double err = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
      r.max_rel_error = std::max(r.max_rel_error, err);
      ++r.compared;
    }
  }
  return r;
}

// Uniform inputs in [-1, 1] with |x| >= margin, keeping probes off ReLU kinks.
Tensor away_from_zero(std::mt19937& gen, const Shape& shape, float margin = 0.05f) {
  Tensor t = oracle::uniform_tensor(gen, shape);
  for (float& x : t.data()) {
    if (std::abs(x) < margin) x = x < 0 ? -margin - 0.01f : margin + 0.01f;
  }
  return t;
}

constexpr double kTol = 1e-3;
constexpr double kForwardTol = 1e-5;

void expect_ok(const FdResult& r, const std::string& name) {
  EXPECT_LT(r.max_rel_error, kTol) << name;
  EXPECT_LT(r.max_forward_error, kForwardTol) << name;
  EXPECT_GT(r.compared, 0u) << name;
}

}  // namespace

TEST(Autodiff, ElementwiseOps) {
  std::mt19937 gen(1);
  const Tensor a = oracle::uniform_tensor(gen, {3, 4});
  const Tensor b = oracle::uniform_tensor(gen, {3, 4});
  struct Case {
    const char* name;
    Builder fn;
    Reference ref;
  };
  const std::vector<Case> cases = {
      {"add", [](Tape&, const std::vector<Var>& v) { return ops::add(v[0], v[1]); },
       [](const std::vector<D>& x) { return ref::zip(x[0], x[1], [](double p, double q) { return p + q; }); }},
      {"sub", [](Tape&, const std::vector<Var>& v) { return ops::sub(v[0], v[1]); },
       [](const std::vector<D>& x) { return ref::zip(x[0], x[1], [](double p, double q) { return p - q; }); }},
      {"mul", [](Tape&, const std::vector<Var>& v) { return ops::mul(v[0], v[1]); },
       [](const std::vector<D>& x) { return ref::zip(x[0], x[1], [](double p, double q) { return p * q; }); }},
      {"scale", [](Tape&, const std::vector<Var>& v) { return ops::scale(v[0], -0.7f); },
       [](const std::vector<D>& x) { return ref::map(x[0], [](double p) { return double(-0.7f) * p; }); }},
      {"axpby", [](Tape&, const std::vector<Var>& v) { return ops::axpby(0.3f, v[0], -1.2f, v[1]); },
       [](const std::vector<D>& x) {
         return ref::zip(x[0], x[1], [](double p, double q) { return double(0.3f) * p + double(-1.2f) * q; });
       }},
      {"square", [](Tape&, const std::vector<Var>& v) { return ops::square(v[0]); },
       [](const std::vector<D>& x) { return ref::map(x[0], [](double p) { return p * p; }); }},
      {"sigmoid", [](Tape&, const std::vector<Var>& v) { return ops::sigmoid(v[0]); },
       [](const std::vector<D>& x) { return ref::map(x[0], ref::sigmoid); }},
      {"sum", [](Tape&, const std::vector<Var>& v) { return ops::sum(v[0]); },
       [](const std::vector<D>& x) { return ref::scalar(ref::total(x[0])); }},
      {"mean", [](Tape&, const std::vector<Var>& v) { return ops::mean(v[1]); },
       [](const std::vector<D>& x) { return ref::scalar(ref::total(x[1]) / double(x[1].size())); }},
      {"mse", [](Tape&, const std::vector<Var>& v) { return ops::mse(v[0], v[1]); },
       [](const std::vector<D>& x) { return ref::scalar(ref::mse(x[0], x[1])); }},
  };
  for (const auto& c : cases) expect_ok(finite_difference({a, b}, c.fn, c.ref, 11), c.name);
}

TEST(Autodiff, Relu) {
  std::mt19937 gen(2);
  expect_ok(finite_difference(
                {away_from_zero(gen, {5, 6})}, [](Tape&, const std::vector<Var>& v) { return ops::relu(v[0]); },
                [](const std::vector<D>& x) { return ref::map(x[0], [](double p) { return p > 0 ? p : 0.0; }); }, 3),
            "relu");
}

TEST(Autodiff, WeightedReductions) {
  std::mt19937 gen(3);
  const Tensor a = oracle::uniform_tensor(gen, {2, 3, 2});
  const Tensor b = oracle::uniform_tensor(gen, {2, 3, 2});
  const std::vector<double> w{1, 0, 1, 1, 0, 1};
  const Tensor wt(Shape{2, 3}, std::vector<float>{1, 0, 1, 1, 0, 1});
  expect_ok(finite_difference(
                {a, b}, [&](Tape&, const std::vector<Var>& v) { return ops::weighted_mse(v[0], v[1], wt); },
                [&](const std::vector<D>& x) {
                  double s = 0.0, ws = 0.0;
                  for (std::size_t i = 0; i < x[0].size(); ++i) {
                    s += w[i / 2] * std::pow(x[0][i] - x[1][i], 2);
                    ws += w[i / 2];
                  }
                  return ref::scalar(s / ws);
                },
                4),
            "weighted_mse");
  expect_ok(finite_difference(
                {a, b},
                [](Tape&, const std::vector<Var>& v) {
                  const std::vector<Var> terms{ops::sum(v[0]), ops::mean(ops::square(v[1]))};
                  const std::vector<float> weights{0.5f, 2.0f};
                  return ops::weighted_sum(terms, weights);
                },
                [](const std::vector<D>& x) {
                  double sq = 0.0;
                  for (double q : x[1].v) sq += q * q;
                  return ref::scalar(0.5 * ref::total(x[0]) + 2.0 * sq / double(x[1].size()));
                },
                5),
            "weighted_sum");
}

TEST(Autodiff, Linear) {
  std::mt19937 gen(4);
  expect_ok(finite_difference(
                {oracle::uniform_tensor(gen, {3, 5}), oracle::uniform_tensor(gen, {5, 4}), oracle::uniform_tensor(gen, {4})},
                [](Tape&, const std::vector<Var>& v) { return ops::linear(v[0], v[1], v[2]); },
                [](const std::vector<D>& x) { return ref::linear(x[0], x[1], x[2]); }, 6),
            "linear");
}

TEST(Autodiff, Conv3x3) {
  std::mt19937 gen(5);
  expect_ok(finite_difference({oracle::uniform_tensor(gen, {2, 4, 5, 3}), oracle::uniform_tensor(gen, {3, 3, 3, 2}),
                               oracle::uniform_tensor(gen, {2})},
                              [](Tape&, const std::vector<Var>& v) { return ops::conv3x3(v[0], v[1], v[2]); },
                              [](const std::vector<D>& x) { return ref::conv3x3(x[0], x[1], x[2]); }, 7),
            "conv3x3");
}

TEST(Autodiff, TemporalConv3) {
  std::mt19937 gen(6);
  expect_ok(finite_difference({oracle::uniform_tensor(gen, {4, 2, 3, 3}), oracle::uniform_tensor(gen, {3, 3, 2}),
                               oracle::uniform_tensor(gen, {2})},
                              [](Tape&, const std::vector<Var>& v) { return ops::temporal_conv3(v[0], v[1], v[2]); },
                              [](const std::vector<D>& x) { return ref::temporal_conv3(x[0], x[1], x[2]); }, 8),
            "temporal_conv3");
}

TEST(Autodiff, ShapeOps) {
  std::mt19937 gen(7);
  const Tensor x = oracle::uniform_tensor(gen, {3, 4, 4, 2});
  const Tensor y = oracle::uniform_tensor(gen, {3, 4, 4, 3});
  const Tensor bias = oracle::uniform_tensor(gen, {2});
  const std::vector<std::int64_t> layout{0, 1, 1, 2, 2, 0};
  struct Case {
    const char* name;
    Builder fn;
    Reference ref;
  };
  const std::vector<Case> cases = {
      {"add_channel_bias", [](Tape&, const std::vector<Var>& v) { return ops::add_channel_bias(v[0], v[2]); },
       [](const std::vector<D>& d) { return ref::add_channel_bias(d[0], d[2]); }},
      {"avg_pool2", [](Tape&, const std::vector<Var>& v) { return ops::avg_pool2(v[0]); },
       [](const std::vector<D>& d) { return ref::avg_pool2(d[0]); }},
      {"upsample_nearest", [](Tape&, const std::vector<Var>& v) { return ops::upsample_nearest(v[0], 3); },
       [](const std::vector<D>& d) { return ref::upsample(d[0], 3); }},
      {"concat_channels", [](Tape&, const std::vector<Var>& v) { return ops::concat_channels(v[0], v[1]); },
       [](const std::vector<D>& d) { return ref::concat(d[0], d[1]); }},
      {"gather_frames", [&](Tape&, const std::vector<Var>& v) { return ops::gather_frames(v[1], layout); },
       [&](const std::vector<D>& d) { return ref::gather(d[1], layout); }},
  };
  for (const auto& c : cases) expect_ok(finite_difference({x, y, bias}, c.fn, c.ref, 9), c.name);
}

TEST(Autodiff, InstanceNorm) {
  std::mt19937 gen(8);
  expect_ok(finite_difference({oracle::uniform_tensor(gen, {2, 3, 4, 2}), oracle::uniform_tensor(gen, {2}),
                               oracle::uniform_tensor(gen, {2})},
                              [](Tape&, const std::vector<Var>& v) { return ops::instance_norm(v[0], v[1], v[2]); },
                              [](const std::vector<D>& x) { return ref::instance_norm(x[0], x[1], x[2]); }, 10),
            "instance_norm");
}

TEST(Autodiff, DegradationReversalAndZ0Prediction) {
  std::mt19937 gen(9);
  const Tensor zeta = oracle::uniform_tensor(gen, {2, 3, 3, 2});
  const double g = 0.3f;
  expect_ok(finite_difference(
                {oracle::uniform_tensor(gen, {2, 3, 3, 2})},
                [&](Tape&, const std::vector<Var>& v) { return noise::undegrade(v[0], zeta, 0.3f); },
                [&](const std::vector<D>& x) {
                  const double k = std::sqrt((1 - g) * (1 - g) + g * g);
                  D o(x[0].shape);
                  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (k * x[0][i] - g * zeta[i]) / (1 - g);
                  return o;
                },
                12),
            "undegrade");
  const auto schedule = diffusion::make_schedule({20, 1e-4, 0.02});
  // alpha_bar_7 from the linear beta ramp, recomputed here.
  double abar = 1.0;
  for (int i = 0; i < 7; ++i) abar *= 1.0 - (1e-4 + (0.02 - 1e-4) * i / 19.0);
  ASSERT_NEAR(schedule.alpha_bar(7), abar, 1e-12);
  expect_ok(finite_difference(
                {oracle::uniform_tensor(gen, {2, 3, 3, 2}), oracle::uniform_tensor(gen, {2, 3, 3, 2})},
                [&](Tape&, const std::vector<Var>& v) { return diffusion::predict_z0(v[0], v[1], 7, schedule); },
                [&](const std::vector<D>& x) {
                  return ref::zip(x[0], x[1], [&](double z, double e) { return (z - std::sqrt(1 - abar) * e) / std::sqrt(abar); });
                },
                13),
            "predict_z0");
}

TEST(Autodiff, UnwarpFuse) {
  const auto skeleton = body::scale_skeleton(body::Skeleton::default_humanoid(), 0.2);
  body::Pose pose;
  pose.root_position = {8.0, 7.0};
  pose.offsets.assign(skeleton.size(), 0.1);
  body::Pose pose2 = pose;
  pose2.offsets[2] = 0.6;
  const std::vector<body::Pose> poses{pose, pose2};
  const auto maps = raster::rasterize_sequence(skeleton, poses, 16, 16);
  const std::int64_t U = 6, V = 6, C = 2;
  std::mt19937 gen(10);
  const auto r = finite_difference(
      {oracle::uniform_tensor(gen, {2, 16, 16, C})},
      [&](Tape&, const std::vector<Var>& v) { return noise::unwarp_fuse(v[0], maps, U, V).values; },
      [&](const std::vector<D>& x) {
        D acc(Shape{U, V, C});
        std::vector<double> count(static_cast<std::size_t>(U * V), 0.0);
        for (std::size_t f = 0; f < maps.size(); ++f) {
          for (std::size_t p = 0; p < maps[f].pixels(); ++p) {
            if (!maps[f].mask[p]) continue;
            const auto i = std::min<std::int64_t>(
                static_cast<std::int64_t>(std::floor(std::clamp<double>(maps[f].u[p], 0, 1) * U)), U - 1);
            const auto j = std::min<std::int64_t>(
                static_cast<std::int64_t>(std::floor(std::clamp<double>(maps[f].v[p], 0, 1) * V)), V - 1);
            count[static_cast<std::size_t>(i * V + j)] += 1;
            for (std::int64_t c = 0; c < C; ++c)
              acc[static_cast<std::size_t>((i * V + j) * C + c)] += x[0][(f * maps[f].pixels() + p) * C + c];
          }
        }
        for (std::size_t t = 0; t < count.size(); ++t)
          for (std::int64_t c = 0; c < C; ++c)
            if (count[t] > 0) acc[t * C + c] /= count[t];
        return acc;
      },
      14);
  expect_ok(r, "unwarp_fuse");
}

// A two-layer convolutional network with a sigmoid, a temporal mix and an MSE
// head, differentiated with respect to every weight.
TEST(Autodiff, RandomSmallNetwork) {
  for (std::uint32_t seed : {21u, 22u, 23u}) {
    std::mt19937 gen(seed);
    const Tensor x = oracle::uniform_tensor(gen, {3, 4, 4, 2});
    const Tensor target = oracle::uniform_tensor(gen, {3, 4, 4, 2});
    std::vector<Tensor> params{oracle::uniform_tensor(gen, {3, 3, 2, 3}, -0.5f, 0.5f), oracle::uniform_tensor(gen, {3}),
                               oracle::uniform_tensor(gen, {3, 3, 3}, -0.5f, 0.5f), oracle::uniform_tensor(gen, {3}),
                               oracle::uniform_tensor(gen, {3, 3, 3, 2}, -0.5f, 0.5f), oracle::uniform_tensor(gen, {2})};
    const Builder net = [&](Tape& t, const std::vector<Var>& v) {
      Var h = ops::conv3x3(t.constant(x), v[0], v[1]);
      h = ops::add(h, ops::temporal_conv3(h, v[2], v[3]));
      Var y = ops::conv3x3(ops::sigmoid(h), v[4], v[5]);
      return ops::mse(y, t.constant(target));
    };
    const D xd = D::from(x), td = D::from(target);
    const Reference net_ref = [&](const std::vector<D>& v) {
      D h = ref::conv3x3(xd, v[0], v[1]);
      h = ref::zip(h, ref::temporal_conv3(h, v[2], v[3]), [](double p, double q) { return p + q; });
      const D y = ref::conv3x3(ref::map(h, ref::sigmoid), v[4], v[5]);
      return ref::scalar(ref::mse(y, td));
    };
    const auto r = finite_difference(params, net, net_ref, seed);
    expect_ok(r, "seed " + std::to_string(seed));
    EXPECT_EQ(r.compared, 54u + 3 + 27 + 3 + 54 + 2);
  }
}
