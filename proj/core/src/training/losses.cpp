#include "anw/training/losses.hpp"

#include <stdexcept>

#include "anw/numeric/ops.hpp"

namespace anw::train {
namespace {

double mse_value(const Tensor& a, const Tensor& b, const char* what) {
  require_same_shape(a, b, what);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    acc += d * d;
  }
  return a.size() == 0 ? 0.0 : acc / static_cast<double>(a.size());
}

Tensor coverage_weights(const Tensor& coverage) {
  Tensor w = Tensor::zeros_like(coverage);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = coverage[i] >= 1.0f ? 1.0f : 0.0f;
  return w;
}

}  // namespace

double loss_diff(const Tensor& eps, const Tensor& eps_pred) { return mse_value(eps, eps_pred, "loss_diff"); }
Var loss_diff(Var eps, Var eps_pred) { return ops::mse(eps, eps_pred); }

double loss_md(const Tensor& target, const Tensor& predicted) { return mse_value(target, predicted, "loss_md"); }
Var loss_md(Var target, Var predicted) { return ops::mse(target, predicted); }

double loss_md_masked(const Tensor& target, const Tensor& predicted, const Tensor& mask) {
  require_same_shape(target, predicted, "loss_md_masked");
  const std::size_t channels = target.rank() > 0 ? static_cast<std::size_t>(target.dim(-1)) : 1;
  if (mask.size() * channels != target.size()) throw ShapeError("loss_md_masked: mask does not match motion maps");
  double acc = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double w = mask[i / channels];
    const double d = static_cast<double>(target[i]) - predicted[i];
    acc += w * d * d;
    wsum += w;
  }
  return wsum > 0.0 ? acc / wsum : 0.0;
}

Var loss_md_masked(Var target, Var predicted, const Tensor& mask) {
  return ops::weighted_mse(target, predicted, mask);
}

double loss_mc(const Tensor& texture, const Tensor& fused, const Tensor& coverage) {
  require_same_shape(texture, fused, "loss_mc");
  const std::size_t channels = texture.rank() > 0 ? static_cast<std::size_t>(texture.dim(-1)) : 1;
  if (coverage.size() * channels != texture.size()) throw ShapeError("loss_mc: coverage does not match texture");
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < texture.size(); ++i) {
    if (coverage[i / channels] < 1.0f) continue;
    const double d = static_cast<double>(texture[i]) - fused[i];
    acc += d * d;
    ++n;
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

Var loss_mc(Var texture, Var fused, const Tensor& coverage) {
  return ops::weighted_mse(texture, fused, coverage_weights(coverage));
}

void validate(const LossWeights& w) {
  if (w.diff < 0.0 || w.mc < 0.0 || w.md < 0.0) throw std::invalid_argument("loss weights must be nonnegative");
}

double total_loss(double l_diff, double l_mc, double l_md, const LossWeights& w) {
  validate(w);
  return w.diff * l_diff + w.mc * l_mc + w.md * l_md;
}

}  // namespace anw::train
