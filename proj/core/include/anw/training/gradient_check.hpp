#pragma once

#include <string>
#include <vector>

#include "anw/training/trainer.hpp"

namespace anw::train {

struct GradientCheckConfig {
  LossWeights weights;  // all three terms active by default
  float gamma = 0.3f;
  int t = 60;
  // Central-difference half width, applied to the double-precision
  // reference objective. Quartered up to three times when a probe flips a
  // ReLU.
  double step = 1e-4;
  // Entries with |analytic| and |numeric| both below this are compared in
  // absolute terms, so float32 round-off in near-zero analytic gradients
  // does not dominate the relative error.
  double floor = 1e-5;
  bool zero_final_layers = false;
  std::uint64_t seed = 7;
};

struct GradientCheckEntry {
  std::string parameter;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradientCheckReport {
  std::size_t parameter_count = 0;
  // Entries whose probes changed a ReLU branch even at step/64; the loss is
  // not differentiable across those probes, so they are not compared.
  std::size_t kink_crossings = 0;
  double max_rel_error = 0.0;
  GradientCheckEntry worst;
  // |float32 objective - double reference| / |reference| at the base point.
  double forward_rel_diff = 0.0;
  // Largest |analytic gradient| per tensor, denoiser first then decoder.
  std::vector<std::pair<std::string, double>> grad_magnitudes;
};

/// Miniature instance: latent 2x4x4x4, image 5x32x32, fewer than 1000
/// parameters. Compares every analytic (float32, taped) gradient of the total
/// objective with a central finite difference of an independent
/// double-precision forward pass, skipping probes that cross a ReLU kink.
GradientCheckReport gradient_check(const GradientCheckConfig& config = {});

/// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor);

}  // namespace anw::train
