#pragma once

#include "anw/numeric/tape.hpp"

namespace anw::train {

struct LossWeights {
  double diff = 1.0;
  double mc = 0.5;
  double md = 0.5;
};

/// Mean squared error between added and predicted noise.
double loss_diff(const Tensor& eps, const Tensor& eps_pred);
Var loss_diff(Var eps, Var eps_pred);

/// Mean squared error between motion maps (u, v, mask) and the decoder output.
double loss_md(const Tensor& target, const Tensor& predicted);
Var loss_md(Var target, Var predicted);
/// Body-only variant: pixels weighted by `mask` (frames, H, W).
double loss_md_masked(const Tensor& target, const Tensor& predicted, const Tensor& mask);
Var loss_md_masked(Var target, Var predicted, const Tensor& mask);

/// Mean squared error over texels with coverage >= 1; 0 when none is covered.
double loss_mc(const Tensor& texture, const Tensor& fused, const Tensor& coverage);
Var loss_mc(Var texture, Var fused, const Tensor& coverage);

/// lambda_diff * l_diff + lambda_mc * l_mc + lambda_md * l_md. Throws
/// std::invalid_argument for negative weights.
double total_loss(double l_diff, double l_mc, double l_md, const LossWeights& weights);

void validate(const LossWeights& weights);

}  // namespace anw::train
