#pragma once

#include <cstdint>
#include <vector>

#include "anw/training/trainer.hpp"

namespace anw::train {

/// Model parameters widened to double, in parameter-set order.
struct ReferenceParameters {
  std::vector<std::vector<double>> denoiser;
  std::vector<std::vector<double>> decoder;
};

ReferenceParameters reference_parameters(const diffusion::Model& model);

struct ReferenceLosses {
  double l_diff = 0.0;
  double l_mc = 0.0;
  double l_md = 0.0;
  double total = 0.0;
  // Hash of every ReLU sign pattern; equal signatures mean the same linear piece.
  std::uint64_t branch_signature = 0;
};

/// Forward pass of the training objective in double precision with plain
/// loops and no tape. Architecture shapes come from `model`, weights from
/// `params`. Used as the numeric side of the gradient check.
ReferenceLosses reference_objective(const diffusion::Model& model, const ReferenceParameters& params,
                                    const PreparedClip& clip, const SampleDraws& draws, const TrainConfig& config);

}  // namespace anw::train
