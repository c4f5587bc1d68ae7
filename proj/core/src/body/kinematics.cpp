#include <numbers>
#include <stdexcept>

#include "anw/body/skeleton.hpp"

namespace anw::body {

std::vector<BoneTransform> forward_kinematics(const Skeleton& skeleton, const Pose& pose) {
  if (pose.offsets.size() != skeleton.size()) {
    throw std::invalid_argument("forward_kinematics: pose has " + std::to_string(pose.offsets.size()) +
                                " offsets for " + std::to_string(skeleton.size()) + " bones");
  }
  std::vector<BoneTransform> out(skeleton.size());
  for (std::size_t i = 0; i < skeleton.size(); ++i) {
    const Bone& b = skeleton[i];
    BoneTransform& tf = out[i];
    if (b.parent < 0) {
      tf.angle = b.rest_angle + pose.offsets[i];
      tf.origin = pose.root_position;
    } else {
      const BoneTransform& p = out[static_cast<std::size_t>(b.parent)];
      tf.angle = p.angle + b.rest_angle + pose.offsets[i];
      tf.origin = p.origin + b.attach * (p.end - p.origin);
    }
    tf.axis = {std::cos(tf.angle), std::sin(tf.angle)};
    tf.end = tf.origin + b.rest_length * tf.axis;
  }
  return out;
}

PoseSequence generate_pose_sequence(const Skeleton& skeleton, Rng& rng, int f, double motion_amplitude,
                                    const MotionOptions& options) {
  if (f < 1) throw std::invalid_argument("generate_pose_sequence: f must be >= 1");
  if (motion_amplitude < 0.0 || !std::isfinite(motion_amplitude)) {
    throw std::invalid_argument("generate_pose_sequence: motion amplitude must be a non-negative finite value");
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const int frames = 4 * f + 1;
  const std::size_t n = skeleton.size();

  struct Oscillator {
    double amplitude, cycles, phase;
  };
  std::vector<Oscillator> joints(n);
  for (std::size_t b = 0; b < n; ++b) {
    const double weight = skeleton[b].parent < 0 ? 0.25 : 1.0;
    joints[b].amplitude = weight * motion_amplitude * rng.uniform(0.5, 1.0);
    joints[b].cycles = rng.uniform(options.min_cycles, options.max_cycles);
    joints[b].phase = rng.uniform(0.0, two_pi);
  }
  const Vec2 root{options.root_center.x + rng.uniform(-options.root_jitter, options.root_jitter),
                  options.root_center.y + rng.uniform(-options.root_jitter, options.root_jitter)};
  const double sway_phase = rng.uniform(0.0, two_pi);

  PoseSequence seq(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    const double tau = static_cast<double>(t) / static_cast<double>(frames - 1);
    Pose& p = seq[static_cast<std::size_t>(t)];
    p.root_position = {root.x + options.root_sway * std::sin(two_pi * tau + sway_phase), root.y};
    p.offsets.resize(n);
    for (std::size_t b = 0; b < n; ++b) {
      const Oscillator& o = joints[b];
      p.offsets[b] = o.amplitude * std::sin(two_pi * o.cycles * tau + o.phase);
    }
  }
  return seq;
}

Tensor pose_sequence_to_tensor(const PoseSequence& poses) {
  if (poses.empty()) throw std::invalid_argument("pose_sequence_to_tensor: empty sequence");
  const std::size_t n = poses.front().offsets.size();
  Tensor t(Shape{static_cast<std::int64_t>(poses.size()), static_cast<std::int64_t>(2 + n)});
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (poses[i].offsets.size() != n) throw std::invalid_argument("pose_sequence_to_tensor: ragged sequence");
    float* row = t.ptr() + i * (2 + n);
    row[0] = static_cast<float>(poses[i].root_position.x);
    row[1] = static_cast<float>(poses[i].root_position.y);
    for (std::size_t b = 0; b < n; ++b) row[2 + b] = static_cast<float>(poses[i].offsets[b]);
  }
  return t;
}

PoseSequence pose_sequence_from_tensor(const Tensor& t) {
  if (t.rank() != 2 || t.dim(1) < 3) throw ShapeError("pose tensor must be frames x (2 + bones)");
  const auto frames = static_cast<std::size_t>(t.dim(0));
  const auto n = static_cast<std::size_t>(t.dim(1) - 2);
  PoseSequence seq(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const float* row = t.ptr() + i * (2 + n);
    seq[i].root_position = {row[0], row[1]};
    seq[i].offsets.assign(row + 2, row + 2 + n);
  }
  return seq;
}

}  // namespace anw::body
