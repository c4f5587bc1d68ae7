#include "anw/numeric/rng.hpp"

#include <cmath>
#include <numbers>

namespace anw {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), key_(mix64(seed ^ 0x616E772D726E6721ULL)) {}

Rng Rng::stream(std::string_view name) const {
  return Rng(seed_, mix64(key_ ^ mix64(fnv1a(name) + kGolden)));
}

Rng Rng::stream(std::uint64_t index) const {
  return Rng(seed_, mix64(key_ + mix64(index ^ 0x5851F42D4C957F2DULL)));
}

std::uint64_t Rng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = span == 0 ? 0 : (~std::uint64_t{0} / span) * span;
  std::uint64_t x = next_u64();
  while (span != 0 && x >= limit) x = next_u64();
  return lo + static_cast<std::int64_t>(span == 0 ? x : x % span);
}

float Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  // u1 on (0, 1] so the logarithm stays finite.
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = static_cast<float>(radius * std::sin(angle));
  has_cached_ = true;
  return static_cast<float>(radius * std::cos(angle));
}

Tensor sample_standard_normal(Rng& rng, const Shape& shape) {
  Tensor out(shape);
  for (float& x : out.data()) x = rng.normal();
  return out;
}

}  // namespace anw
