#pragma once

#include <span>
#include <vector>

#include "anw/numeric/tape.hpp"

namespace anw::diffusion {

struct ScheduleConfig {
  int steps = 200;
  double beta_start = 1e-4;
  double beta_end = 0.02;
};

/// Linear beta schedule indexed t = 1..T; t = 0 is the clean boundary with
/// alpha_bar(0) = 1.
class NoiseSchedule {
 public:
  NoiseSchedule() = default;
  NoiseSchedule(ScheduleConfig config, std::vector<double> betas);

  const ScheduleConfig& config() const noexcept { return config_; }
  int steps() const noexcept { return static_cast<int>(betas_.size()); }
  double beta(int t) const;
  double alpha(int t) const { return 1.0 - beta(t); }
  double alpha_bar(int t) const;

 private:
  ScheduleConfig config_;
  std::vector<double> betas_;
  std::vector<double> alpha_bars_;  // alpha_bars_[0] = 1
};

/// Throws std::invalid_argument unless 0 < beta_start <= beta_end < 1 and T >= 2.
NoiseSchedule make_schedule(const ScheduleConfig& config);

/// z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) eps for t in [0, T]; t = 0 returns z0.
Tensor add_noise(const Tensor& z0, const Tensor& eps, int t, const NoiseSchedule& schedule);

/// z0' = (z_t - sqrt(1 - abar_t) eps') / sqrt(abar_t).
Tensor predict_z0(const Tensor& z_t, const Tensor& eps_pred, int t, const NoiseSchedule& schedule);
Var predict_z0(Var z_t, Var eps_pred, int t, const NoiseSchedule& schedule);

}  // namespace anw::diffusion
