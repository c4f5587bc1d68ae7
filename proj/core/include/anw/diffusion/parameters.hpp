#pragma once

#include <string>
#include <utility>
#include <vector>

#include "anw/numeric/rng.hpp"
#include "anw/numeric/tape.hpp"

namespace anw::diffusion {

/// Ordered, named parameter tensors. The order is part of the architecture
/// signature: forward passes address entries by position.
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const noexcept { return entries_.size(); }
  const std::string& name(std::size_t i) const { return entries_.at(i).first; }
  Tensor& value(std::size_t i) { return entries_.at(i).second; }
  const Tensor& value(std::size_t i) const { return entries_.at(i).second; }
  /// Throws std::out_of_range for unknown names.
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  std::size_t numel() const;

  /// Puts every entry on the tape, as parameters when `trainable`, else as constants.
  std::vector<Var> bind(Tape& tape, bool trainable) const;

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

/// He-normal initialization with the given fan-in.
Tensor he_normal(Rng& rng, const Shape& shape, std::int64_t fan_in, double gain = 1.0);

}  // namespace anw::diffusion
