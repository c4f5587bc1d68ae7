#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anw/numeric/tape.hpp"

/// Differentiable building blocks recorded on a Tape.
///
/// Image-like operands are channel-last: (frames, height, width, channels).
/// Reductions accumulate in double and follow a fixed sequential order.
namespace anw::ops {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, float s);
/// alpha * a + beta * b
Var axpby(float alpha, Var a, float beta, Var b);
Var square(Var a);
Var relu(Var a);
Var sigmoid(Var a);

Var sum(Var a);
Var mean(Var a);
/// Mean of (a - b)^2 over all elements.
Var mse(Var a, Var b);
/// sum(w * (a - b)^2) / sum(w); 0 when all weights are zero. `weights` is
/// broadcast over the trailing channel axis when it has one fewer element
/// factor (shape of a without its last axis).
Var weighted_mse(Var a, Var b, const Tensor& weights);

/// Weighted sum of scalar Vars.
Var weighted_sum(std::span<const Var> terms, std::span<const float> weights);

/// x: (n) or (rows, n); w: (n, m); b: (m).
Var linear(Var x, Var w, Var b);

/// Per-frame 3x3 convolution with zero padding 1. x: (F,H,W,Ci), w: (3,3,Ci,Co), b: (Co).
Var conv3x3(Var x, Var w, Var b);
/// Length-3 convolution over the frame axis, zero padded. w: (3,Ci,Co), b: (Co).
Var temporal_conv3(Var x, Var w, Var b);
/// Adds a per-channel vector to every pixel of every frame.
Var add_channel_bias(Var x, Var bias);
/// 2x2 average pooling; H and W must be even.
Var avg_pool2(Var x);
/// Nearest-neighbour spatial upsampling by an integer factor.
Var upsample_nearest(Var x, int factor);
Var concat_channels(Var a, Var b);
/// Output frame k is input frame indices[k]; gradients of repeated frames add.
Var gather_frames(Var x, std::span<const std::int64_t> indices);
/// Per-frame, per-channel normalization over the spatial axes with affine
/// scale/shift. gamma, beta: (C).
Var instance_norm(Var x, Var gamma, Var beta, float eps = 1e-5f);

}  // namespace anw::ops
