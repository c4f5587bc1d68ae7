#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "anw/numeric/rng.hpp"
#include "anw/numeric/tensor.hpp"

namespace anw::body {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  double norm() const { return std::hypot(x, y); }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Axis-aligned UV rectangle; u runs along the bone axis, v across it.
struct UvRect {
  double u0 = 0.0, v0 = 0.0, u1 = 1.0, v1 = 1.0;

  bool contains(double u, double v) const { return u >= u0 && u <= u1 && v >= v0 && v <= v1; }
  bool overlaps(const UvRect& o) const { return u0 < o.u1 && o.u0 < u1 && v0 < o.v1 && o.v0 < v1; }
};

struct Bone {
  std::string name;
  int parent = -1;
  double rest_length = 1.0;  // pixels
  double rest_angle = 0.0;   // radians, relative to the parent's world angle
  double half_width = 1.0;   // capsule radius, pixels
  /// Where along the parent the bone is anchored: 1 = parent's endpoint
  /// (the usual chain), 0 = parent's origin (hips under a torso root).
  double attach = 1.0;
  UvRect chart;
};

/// Articulated 2D puppet with a disjoint UV atlas. Image coordinates: x to
/// the right, y down; angles measured from +x towards +y.
class Skeleton {
 public:
  Skeleton() = default;
  /// Validates on construction; throws std::invalid_argument.
  explicit Skeleton(std::vector<Bone> bones);

  /// Ten-bone humanoid (torso root, head, upper/lower arms, upper/lower legs)
  /// sized for a 96x128 frame, charts packed in a 4x3 grid with 2-texel
  /// gutters at a 64-texel atlas.
  static Skeleton default_humanoid();

  const std::vector<Bone>& bones() const noexcept { return bones_; }
  std::size_t size() const noexcept { return bones_.size(); }
  const Bone& operator[](std::size_t i) const { return bones_[i]; }

  /// Total rest length of bone `i` and all of its descendants.
  double subtree_length(std::size_t i) const;

 private:
  std::vector<Bone> bones_;
};

/// Copy with every rest length and half width multiplied by `factor` > 0.
Skeleton scale_skeleton(const Skeleton& skeleton, double factor);

struct Pose {
  Vec2 root_position;
  std::vector<double> offsets;  // one rotation offset per bone
};

using PoseSequence = std::vector<Pose>;

struct BoneTransform {
  Vec2 origin;
  Vec2 axis;  // unit direction
  Vec2 end;
  double angle = 0.0;
};

/// World-space bone frames. Throws std::invalid_argument on a bone-count mismatch.
std::vector<BoneTransform> forward_kinematics(const Skeleton& skeleton, const Pose& pose);

struct MotionOptions {
  Vec2 root_center{64.0, 52.0};
  /// Per-clip uniform jitter of the root position, pixels.
  double root_jitter = 6.0;
  /// Amplitude of a slow sinusoidal root sway within the clip, pixels.
  double root_sway = 0.0;
  /// Joint oscillation frequency range, cycles per clip.
  double min_cycles = 0.25;
  double max_cycles = 0.75;
};

/// Smooth sinusoidal motion with 4f+1 frames. Each joint oscillates with a
/// random amplitude in [0.5, 1] x motion_amplitude (the root bone scaled by
/// 0.25), random phase and frequency. Throws for f < 1 or a negative amplitude.
PoseSequence generate_pose_sequence(const Skeleton& skeleton, Rng& rng, int f, double motion_amplitude,
                                    const MotionOptions& options = {});

/// frames x (2 + bones): root x, root y, then per-bone offsets.
Tensor pose_sequence_to_tensor(const PoseSequence& poses);
PoseSequence pose_sequence_from_tensor(const Tensor& t);

/// Skeleton definition file: INI-style text, one [boneN] section per bone.
void save_skeleton(const std::filesystem::path& path, const Skeleton& skeleton);
Skeleton load_skeleton(const std::filesystem::path& path);

}  // namespace anw::body
