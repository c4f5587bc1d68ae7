#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anw/numeric/tensor.hpp"

namespace anw::train {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  /// Moments shaped like `params`.
  Adam(AdamConfig config, std::span<Tensor* const> params);

  const AdamConfig& config() const noexcept { return config_; }
  std::int64_t steps() const noexcept { return t_; }

  /// One bias-corrected update; `grads` aligned with the constructor's params.
  void step(std::span<Tensor* const> params, std::span<const Tensor> grads);

 private:
  AdamConfig config_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::int64_t t_ = 0;
};

}  // namespace anw::train
