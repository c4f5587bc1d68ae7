#include "anw/diffusion/motion_decoder.hpp"

#include <sstream>

#include "anw/diffusion/codec.hpp"
#include "anw/numeric/ops.hpp"

namespace anw::diffusion {
namespace {

enum Slot : std::size_t { kW1, kB1, kG1, kBeta1, kW2, kB2, kG2, kBeta2, kWh, kBh, kSlotCount };

}  // namespace

std::string MotionDecoderConfig::signature() const {
  std::ostringstream os;
  os << "motion_decoder/v1 C=" << channels << " w1=" << width1 << " w2=" << width2 << " s=" << spatial
     << " r=" << temporal;
  return os.str();
}

MotionDecoder::MotionDecoder(MotionDecoderConfig config, ParameterSet params)
    : config_(config), params_(std::move(params)) {
  if (config_.spatial < 4 || config_.spatial % 4 != 0) {
    throw std::invalid_argument("motion decoder: spatial factor must be a positive multiple of 4");
  }
  if (params_.size() != kSlotCount) throw std::invalid_argument("motion decoder: parameter count does not match architecture");
}

MotionDecoder MotionDecoder::initialize(const MotionDecoderConfig& cfg, Rng& rng) {
  ParameterSet p;
  p.add("block1.w", he_normal(rng, {3, 3, cfg.channels, cfg.width1}, 9 * cfg.channels));
  p.add("block1.b", Tensor(Shape{cfg.width1}));
  p.add("block1.gamma", Tensor(Shape{cfg.width1}, 1.0f));
  p.add("block1.beta", Tensor(Shape{cfg.width1}));
  p.add("block2.w", he_normal(rng, {3, 3, cfg.width1, cfg.width2}, 9 * cfg.width1));
  p.add("block2.b", Tensor(Shape{cfg.width2}));
  p.add("block2.gamma", Tensor(Shape{cfg.width2}, 1.0f));
  p.add("block2.beta", Tensor(Shape{cfg.width2}));
  p.add("head.w", he_normal(rng, {3, 3, cfg.width2, 3}, 9 * cfg.width2, 0.5));
  p.add("head.b", Tensor(Shape{3}));
  return MotionDecoder(cfg, std::move(p));
}

Var MotionDecoder::forward(Tape& /*tape*/, std::span<const Var> w, Var latent) const {
  using namespace ops;
  if (w.size() != kSlotCount) throw std::invalid_argument("motion decoder: bound parameter count mismatch");
  const Tensor& z = latent.value();
  if (z.rank() != 4 || z.dim(3) != config_.channels || z.dim(0) < 1) {
    throw ShapeError("motion decoder: latent must be (1+f, h, w, " + std::to_string(config_.channels) + "), got " +
                     shape_string(z.shape()));
  }
  Var x = relu(instance_norm(conv3x3(upsample_nearest(latent, 2), w[kW1], w[kB1]), w[kG1], w[kBeta1]));
  x = relu(instance_norm(conv3x3(upsample_nearest(x, 2), w[kW2], w[kB2]), w[kG2], w[kBeta2]));
  x = sigmoid(conv3x3(x, w[kWh], w[kBh]));
  if (config_.spatial > 4) x = upsample_nearest(x, config_.spatial / 4);
  const LatentCodec codec{config_.spatial, config_.temporal, config_.channels};
  const auto layout = codec.frame_layout(z.dim(0));
  return gather_frames(x, layout);
}

Tensor MotionDecoder::predict(const Tensor& latent) const {
  Tape tape(false);
  const auto bound = params_.bind(tape, false);
  return forward(tape, bound, tape.constant(latent)).value();
}

}  // namespace anw::diffusion
