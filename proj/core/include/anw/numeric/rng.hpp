#pragma once

#include <cstdint>
#include <string_view>

#include "anw/numeric/tensor.hpp"

namespace anw {

/// Counter-based generator: output n is a 64-bit finalizer applied to
/// key + n * golden-ratio increment (the SplitMix64 sequence for that key).
///
/// Named or indexed child streams derive a fresh key from the parent key,
/// so data generation, texture noise, background noise and degradation
/// noise never share draws. The key is a hash of the seed; seed 0 is valid.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Independent child stream. Does not advance this generator.
  Rng stream(std::string_view name) const;
  Rng stream(std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer on [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Standard normal via the Box–Muller transform; draws come in pairs.
  float normal();

 private:
  Rng(std::uint64_t seed, std::uint64_t key) : seed_(seed), key_(key) {}

  std::uint64_t seed_ = 0;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  float cached_normal_ = 0.0f;
  bool has_cached_ = false;
};

/// Equivalent to Rng(seed); kept for symmetry with the other module entry points.
inline Rng seed_rng(std::uint64_t seed) { return Rng(seed); }

/// I.i.d. standard normal tensor of the given shape. Zero-size shapes give an
/// empty tensor.
Tensor sample_standard_normal(Rng& rng, const Shape& shape);

}  // namespace anw
