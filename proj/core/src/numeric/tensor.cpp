#include "anw/numeric/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace anw {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw ShapeError("negative axis length in shape " + shape_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_numel(shape_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string(shape_));
  }
}

std::int64_t Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) throw ShapeError("axis out of range for shape " + shape_string(shape_));
  return shape_[static_cast<std::size_t>(axis)];
}

float Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape_));
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  Tensor out;
  if (shape_numel(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  out.shape_ = std::move(shape);
  out.data_ = data_;
  return out;
}

Tensor Tensor::frame(std::int64_t index) const {
  if (rank() < 1 || index < 0 || index >= shape_[0]) {
    throw ShapeError("frame index " + std::to_string(index) + " out of range for " + shape_string(shape_));
  }
  Shape sub(shape_.begin() + 1, shape_.end());
  const std::size_t n = shape_numel(sub);
  std::vector<float> values(data_.begin() + static_cast<std::ptrdiff_t>(index * n),
                            data_.begin() + static_cast<std::ptrdiff_t>((index + 1) * n));
  return Tensor(std::move(sub), std::move(values));
}

void Tensor::fill(float value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float x) { return std::isfinite(x); });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

Tensor stack_frames(std::span<const Tensor> frames) {
  if (frames.empty()) throw ShapeError("stack_frames: no frames");
  Shape shape = frames[0].shape();
  shape.insert(shape.begin(), static_cast<std::int64_t>(frames.size()));
  Tensor out(shape);
  const std::size_t n = frames[0].size();
  for (std::size_t f = 0; f < frames.size(); ++f) {
    require_same_shape(frames[0], frames[f], "stack_frames");
    std::memcpy(out.ptr() + f * n, frames[f].ptr(), n * sizeof(float));
  }
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return m;
}

double sum(const Tensor& t) {
  double s = 0.0;
  for (float x : t.data()) s += x;
  return s;
}

double mean(const Tensor& t) { return t.empty() ? 0.0 : sum(t) / static_cast<double>(t.size()); }

}  // namespace anw
