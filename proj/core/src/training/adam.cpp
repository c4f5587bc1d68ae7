#include "anw/training/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace anw::train {

Adam::Adam(AdamConfig config, std::span<Tensor* const> params) : config_(config) {
  if (!(config_.lr > 0.0) || config_.beta1 < 0.0 || config_.beta1 >= 1.0 || config_.beta2 < 0.0 || config_.beta2 >= 1.0) {
    throw std::invalid_argument("adam: invalid hyperparameters");
  }
  for (Tensor* p : params) {
    m_.push_back(Tensor::zeros_like(*p));
    v_.push_back(Tensor::zeros_like(*p));
  }
}

void Adam::step(std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) throw std::invalid_argument("adam: parameter count changed");
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  const double step = config_.lr * std::sqrt(c2) / c1;
  const double eps_hat = config_.eps * std::sqrt(c2);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& g = grads[k];
    require_same_shape(p, g, "adam");
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      m[i] = static_cast<float>(config_.beta1 * m[i] + (1.0 - config_.beta1) * gi);
      v[i] = static_cast<float>(config_.beta2 * v[i] + (1.0 - config_.beta2) * gi * gi);
      p[i] -= static_cast<float>(step * m[i] / (std::sqrt(static_cast<double>(v[i])) + eps_hat));
    }
  }
}

}  // namespace anw::train
