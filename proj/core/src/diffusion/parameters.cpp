#include "anw/diffusion/parameters.hpp"

#include <cmath>
#include <stdexcept>

namespace anw::diffusion {

std::size_t ParameterSet::add(std::string name, Tensor value) {
  for (const auto& [n, v] : entries_) {
    if (n == name) throw std::invalid_argument("duplicate parameter " + name);
  }
  entries_.emplace_back(std::move(name), std::move(value));
  return entries_.size() - 1;
}

Tensor& ParameterSet::at(const std::string& name) {
  for (auto& [n, v] : entries_) {
    if (n == name) return v;
  }
  throw std::out_of_range("unknown parameter " + name);
}

const Tensor& ParameterSet::at(const std::string& name) const {
  return const_cast<ParameterSet*>(this)->at(name);
}

std::size_t ParameterSet::numel() const {
  std::size_t n = 0;
  for (const auto& [name, v] : entries_) n += v.size();
  return n;
}

std::vector<Var> ParameterSet::bind(Tape& tape, bool trainable) const {
  std::vector<Var> vars;
  vars.reserve(entries_.size());
  for (const auto& [name, v] : entries_) vars.push_back(trainable ? tape.parameter(v) : tape.constant(v));
  return vars;
}

Tensor he_normal(Rng& rng, const Shape& shape, std::int64_t fan_in, double gain) {
  Tensor t = sample_standard_normal(rng, shape);
  const auto scale = static_cast<float>(gain * std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (float& x : t.data()) x *= scale;
  return t;
}

}  // namespace anw::diffusion
