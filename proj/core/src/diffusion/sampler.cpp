#include "anw/diffusion/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace anw::diffusion {

std::vector<int> ddim_timesteps(int T, int count) {
  if (T < 1 || count < 1 || count > T) throw std::invalid_argument("ddim_timesteps: need 1 <= count <= T");
  std::vector<int> steps;
  steps.reserve(static_cast<std::size_t>(count));
  if (count == 1) return {1};
  for (int i = 0; i < count; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(count - 1);
    steps.push_back(static_cast<int>(std::lround(T - frac * (T - 1))));
  }
  return steps;
}

Tensor ddim_sample(const NoisePredictor& predictor, const Tensor& init, const NoiseSchedule& schedule,
                   const std::vector<int>& timesteps) {
  if (timesteps.empty() || timesteps.back() != 1) throw std::invalid_argument("ddim_sample: timesteps must end at 1");
  for (std::size_t i = 0; i < timesteps.size(); ++i) {
    if (timesteps[i] < 1 || timesteps[i] > schedule.steps()) throw std::invalid_argument("ddim_sample: timestep outside [1, T]");
    if (i > 0 && timesteps[i] >= timesteps[i - 1]) throw std::invalid_argument("ddim_sample: timesteps must strictly decrease");
  }
  Tensor z = init;
  Tensor z0;
  for (std::size_t i = 0; i < timesteps.size(); ++i) {
    const int t = timesteps[i];
    const Tensor eps = predictor(z, t);
    require_same_shape(z, eps, "ddim_sample: predictor output");
    z0 = predict_z0(z, eps, t, schedule);
    if (i + 1 == timesteps.size()) break;
    const double ab_prev = schedule.alpha_bar(timesteps[i + 1]);
    const auto a = static_cast<float>(std::sqrt(ab_prev));
    const auto b = static_cast<float>(std::sqrt(1.0 - ab_prev));
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = a * z0[k] + b * eps[k];
  }
  return z0;
}

}  // namespace anw::diffusion
