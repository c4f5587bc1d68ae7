#include "anw/diffusion/denoiser.hpp"

#include <cmath>
#include <sstream>

#include "anw/numeric/ops.hpp"

namespace anw::diffusion {
namespace {

// Positions in the parameter set; matches the insertion order in initialize().
enum Slot : std::size_t {
  kTimeW1, kTimeB1, kBias1W, kBias1B, kBias2W, kBias2B,
  kInW, kInB, kT1W, kT1B,
  kDownW, kDownB, kT2W, kT2B,
  kUpW, kUpB, kOutW, kOutB,
  kSlotCount
};

Tensor broadcast_reference(const Tensor& reference, std::int64_t frames) {
  Tensor out(Shape{frames, reference.dim(0), reference.dim(1), reference.dim(2)});
  for (std::int64_t f = 0; f < frames; ++f) {
    std::copy(reference.data().begin(), reference.data().end(), out.data().begin() + f * static_cast<std::int64_t>(reference.size()));
  }
  return out;
}

}  // namespace

std::string DenoiserConfig::signature() const {
  std::ostringstream os;
  os << "denoiser/v1 C=" << channels << " w1=" << width1 << " w2=" << width2 << " td=" << time_dim
     << " th=" << time_hidden;
  return os.str();
}

Tensor timestep_embedding(int t, std::int64_t dim) {
  Tensor e(Shape{dim});
  const std::int64_t half = dim / 2;
  for (std::int64_t i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
    e[static_cast<std::size_t>(i)] = static_cast<float>(std::sin(t * freq));
    e[static_cast<std::size_t>(i + half)] = static_cast<float>(std::cos(t * freq));
  }
  return e;
}

Denoiser::Denoiser(DenoiserConfig config, ParameterSet params) : config_(config), params_(std::move(params)) {
  if (params_.size() != kSlotCount) throw std::invalid_argument("denoiser: parameter count does not match architecture");
}

Denoiser Denoiser::initialize(const DenoiserConfig& cfg, Rng& rng, bool zero_output) {
  const std::int64_t c2 = 2 * cfg.channels;
  ParameterSet p;
  p.add("time.w1", he_normal(rng, {cfg.time_dim, cfg.time_hidden}, cfg.time_dim));
  p.add("time.b1", Tensor(Shape{cfg.time_hidden}));
  p.add("time.bias1.w", he_normal(rng, {cfg.time_hidden, cfg.width1}, cfg.time_hidden, 0.5));
  p.add("time.bias1.b", Tensor(Shape{cfg.width1}));
  p.add("time.bias2.w", he_normal(rng, {cfg.time_hidden, cfg.width2}, cfg.time_hidden, 0.5));
  p.add("time.bias2.b", Tensor(Shape{cfg.width2}));
  p.add("in.w", he_normal(rng, {3, 3, c2, cfg.width1}, 9 * c2));
  p.add("in.b", Tensor(Shape{cfg.width1}));
  p.add("temporal1.w", he_normal(rng, {3, cfg.width1, cfg.width1}, 3 * cfg.width1, 0.5));
  p.add("temporal1.b", Tensor(Shape{cfg.width1}));
  p.add("down.w", he_normal(rng, {3, 3, cfg.width1, cfg.width2}, 9 * cfg.width1));
  p.add("down.b", Tensor(Shape{cfg.width2}));
  p.add("temporal2.w", he_normal(rng, {3, cfg.width2, cfg.width2}, 3 * cfg.width2, 0.5));
  p.add("temporal2.b", Tensor(Shape{cfg.width2}));
  p.add("up.w", he_normal(rng, {3, 3, cfg.width1 + cfg.width2, cfg.width1}, 9 * (cfg.width1 + cfg.width2)));
  p.add("up.b", Tensor(Shape{cfg.width1}));
  p.add("out.w", zero_output ? Tensor(Shape{3, 3, cfg.width1, cfg.channels})
                             : he_normal(rng, {3, 3, cfg.width1, cfg.channels}, 9 * cfg.width1, 0.5));
  p.add("out.b", Tensor(Shape{cfg.channels}));
  return Denoiser(cfg, std::move(p));
}

Var Denoiser::forward(Tape& tape, std::span<const Var> w, Var z_t, const Tensor& reference, int t) const {
  using namespace ops;
  if (w.size() != kSlotCount) throw std::invalid_argument("denoiser: bound parameter count mismatch");
  const Tensor& z = z_t.value();
  if (z.rank() != 4 || z.dim(3) != config_.channels) {
    throw ShapeError("denoiser: z_t must be (F, h, w, " + std::to_string(config_.channels) + "), got " + shape_string(z.shape()));
  }
  if (reference.shape() != Shape{z.dim(1), z.dim(2), z.dim(3)}) {
    throw ShapeError("denoiser: reference " + shape_string(reference.shape()) + " does not match latent frame of " +
                     shape_string(z.shape()));
  }
  if (z.dim(1) % 2 != 0 || z.dim(2) % 2 != 0) throw ShapeError("denoiser: latent height and width must be even");

  Var temb = tape.constant(timestep_embedding(t, config_.time_dim));
  Var hidden = relu(linear(temb, w[kTimeW1], w[kTimeB1]));
  Var bias1 = linear(hidden, w[kBias1W], w[kBias1B]);
  Var bias2 = linear(hidden, w[kBias2W], w[kBias2B]);

  Var x = concat_channels(z_t, tape.constant(broadcast_reference(reference, z.dim(0))));
  Var h1 = relu(add_channel_bias(conv3x3(x, w[kInW], w[kInB]), bias1));
  Var a1 = relu(add(h1, temporal_conv3(h1, w[kT1W], w[kT1B])));

  Var h2 = relu(add_channel_bias(conv3x3(avg_pool2(a1), w[kDownW], w[kDownB]), bias2));
  Var a2 = relu(add(h2, temporal_conv3(h2, w[kT2W], w[kT2B])));

  Var h3 = relu(conv3x3(concat_channels(upsample_nearest(a2, 2), a1), w[kUpW], w[kUpB]));
  return conv3x3(h3, w[kOutW], w[kOutB]);
}

Tensor Denoiser::predict(const Tensor& z_t, const Tensor& reference, int t) const {
  Tape tape(false);
  const auto bound = params_.bind(tape, false);
  return forward(tape, bound, tape.constant(z_t), reference, t).value();
}

}  // namespace anw::diffusion
