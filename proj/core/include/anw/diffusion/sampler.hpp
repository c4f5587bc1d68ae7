#pragma once

#include <functional>
#include <vector>

#include "anw/diffusion/schedule.hpp"

namespace anw::diffusion {

/// Noise prediction for a latent at timestep t.
using NoisePredictor = std::function<Tensor(const Tensor& z_t, int t)>;

/// `count` uniformly spaced timesteps of 1..T in decreasing order, starting at
/// T and ending at 1.
std::vector<int> ddim_timesteps(int T, int count);

/// Deterministic DDIM: z_prev = sqrt(abar_prev) z0' + sqrt(1 - abar_prev) eps',
/// starting from `init` at timesteps[0]. Returns the final z0'. Throws
/// std::invalid_argument unless `timesteps` strictly decreases within [1, T]
/// and ends at 1.
Tensor ddim_sample(const NoisePredictor& predictor, const Tensor& init, const NoiseSchedule& schedule,
                   const std::vector<int>& timesteps);

}  // namespace anw::diffusion
