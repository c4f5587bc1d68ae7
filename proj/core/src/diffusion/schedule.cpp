#include "anw/diffusion/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "anw/numeric/ops.hpp"

namespace anw::diffusion {

NoiseSchedule::NoiseSchedule(ScheduleConfig config, std::vector<double> betas)
    : config_(config), betas_(std::move(betas)) {
  alpha_bars_.reserve(betas_.size() + 1);
  alpha_bars_.push_back(1.0);
  for (double b : betas_) alpha_bars_.push_back(alpha_bars_.back() * (1.0 - b));
}

double NoiseSchedule::beta(int t) const {
  if (t < 1 || t > steps()) throw std::out_of_range("schedule: t=" + std::to_string(t) + " outside [1, T]");
  return betas_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t > steps()) throw std::out_of_range("schedule: t=" + std::to_string(t) + " outside [0, T]");
  return alpha_bars_[static_cast<std::size_t>(t)];
}

NoiseSchedule make_schedule(const ScheduleConfig& config) {
  if (config.steps < 2) throw std::invalid_argument("make_schedule: T must be >= 2");
  if (!(config.beta_start > 0.0 && config.beta_start <= config.beta_end && config.beta_end < 1.0)) {
    throw std::invalid_argument("make_schedule: need 0 < beta_start <= beta_end < 1");
  }
  std::vector<double> betas(static_cast<std::size_t>(config.steps));
  for (int i = 0; i < config.steps; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(config.steps - 1);
    betas[static_cast<std::size_t>(i)] = config.beta_start + frac * (config.beta_end - config.beta_start);
  }
  return NoiseSchedule(config, std::move(betas));
}

Tensor add_noise(const Tensor& z0, const Tensor& eps, int t, const NoiseSchedule& schedule) {
  require_same_shape(z0, eps, "add_noise");
  if (t < 0 || t > schedule.steps()) throw std::out_of_range("add_noise: t outside [0, T]");
  const double ab = schedule.alpha_bar(t);
  const auto a = static_cast<float>(std::sqrt(ab));
  const auto b = static_cast<float>(std::sqrt(1.0 - ab));
  Tensor out = Tensor::zeros_like(z0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * z0[i] + b * eps[i];
  return out;
}

Tensor predict_z0(const Tensor& z_t, const Tensor& eps_pred, int t, const NoiseSchedule& schedule) {
  require_same_shape(z_t, eps_pred, "predict_z0");
  const double ab = schedule.alpha_bar(t);
  const auto a = static_cast<float>(1.0 / std::sqrt(ab));
  const auto b = static_cast<float>(-std::sqrt(1.0 - ab) / std::sqrt(ab));
  Tensor out = Tensor::zeros_like(z_t);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * z_t[i] + b * eps_pred[i];
  return out;
}

Var predict_z0(Var z_t, Var eps_pred, int t, const NoiseSchedule& schedule) {
  const double ab = schedule.alpha_bar(t);
  return ops::axpby(static_cast<float>(1.0 / std::sqrt(ab)), z_t, static_cast<float>(-std::sqrt(1.0 - ab) / std::sqrt(ab)),
                    eps_pred);
}

}  // namespace anw::diffusion
