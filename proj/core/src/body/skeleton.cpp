#include "anw/body/skeleton.hpp"

#include <numbers>
#include <stdexcept>

namespace anw::body {

Skeleton::Skeleton(std::vector<Bone> bones) : bones_(std::move(bones)) {
  if (bones_.empty()) throw std::invalid_argument("skeleton: no bones");
  for (std::size_t i = 0; i < bones_.size(); ++i) {
    const Bone& b = bones_[i];
    const std::string where = "skeleton bone " + std::to_string(i) + " (" + b.name + "): ";
    if (i == 0 && b.parent != -1) throw std::invalid_argument(where + "root must have parent -1");
    if (i > 0 && (b.parent < 0 || static_cast<std::size_t>(b.parent) >= i)) {
      throw std::invalid_argument(where + "parent index must precede the bone");
    }
    if (!(b.rest_length > 0.0)) throw std::invalid_argument(where + "rest_length must be positive");
    if (!(b.half_width > 0.0)) throw std::invalid_argument(where + "half_width must be positive");
    if (!(b.attach >= 0.0 && b.attach <= 1.0)) throw std::invalid_argument(where + "attach must lie in [0,1]");
    const UvRect& c = b.chart;
    if (!(c.u0 >= 0.0 && c.u0 < c.u1 && c.u1 <= 1.0 && c.v0 >= 0.0 && c.v0 < c.v1 && c.v1 <= 1.0)) {
      throw std::invalid_argument(where + "chart must satisfy 0 <= u0 < u1 <= 1 and 0 <= v0 < v1 <= 1");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (c.overlaps(bones_[j].chart)) {
        throw std::invalid_argument(where + "chart overlaps bone " + std::to_string(j));
      }
    }
  }
}

Skeleton scale_skeleton(const Skeleton& skeleton, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("scale_skeleton: factor must be positive");
  std::vector<Bone> bones = skeleton.bones();
  for (auto& b : bones) {
    b.rest_length *= factor;
    b.half_width *= factor;
  }
  return Skeleton(std::move(bones));
}

double Skeleton::subtree_length(std::size_t i) const {
  double total = bones_.at(i).rest_length;
  for (std::size_t j = i + 1; j < bones_.size(); ++j) {
    // Parents precede children, so a single forward scan finds all descendants.
    for (int p = bones_[j].parent; p >= 0; p = bones_[static_cast<std::size_t>(p)].parent) {
      if (static_cast<std::size_t>(p) == i) {
        total += bones_[j].rest_length;
        break;
      }
    }
  }
  return total;
}

Skeleton Skeleton::default_humanoid() {
  constexpr double pi = std::numbers::pi;
  constexpr int kCols = 4;
  constexpr int kRows = 3;
  constexpr double kGutter = 1.0 / 64.0;  // half of a 2-texel gutter on each side
  auto chart = [](int cell) {
    const int col = cell % kCols;
    const int row = cell / kCols;
    return UvRect{static_cast<double>(col) / kCols + kGutter, static_cast<double>(row) / kRows + kGutter,
                  static_cast<double>(col + 1) / kCols - kGutter, static_cast<double>(row + 1) / kRows - kGutter};
  };
  std::vector<Bone> bones = {
      {"torso", -1, 24.0, -pi / 2, 7.0, 1.0, chart(0)},
      {"head", 0, 10.0, 0.0, 6.0, 1.0, chart(1)},
      {"upper_arm_l", 0, 15.0, 2.5, 3.5, 1.0, chart(2)},
      {"lower_arm_l", 2, 14.0, 0.3, 3.0, 1.0, chart(3)},
      {"upper_arm_r", 0, 15.0, -2.5, 3.5, 1.0, chart(4)},
      {"lower_arm_r", 4, 14.0, -0.3, 3.0, 1.0, chart(5)},
      {"upper_leg_l", 0, 18.0, pi - 0.25, 4.5, 0.0, chart(6)},
      {"lower_leg_l", 6, 17.0, 0.0, 4.0, 1.0, chart(7)},
      {"upper_leg_r", 0, 18.0, pi + 0.25, 4.5, 0.0, chart(8)},
      {"lower_leg_r", 8, 17.0, 0.0, 4.0, 1.0, chart(9)},
  };
  return Skeleton(std::move(bones));
}

}  // namespace anw::body
