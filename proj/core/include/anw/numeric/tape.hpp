#pragma once

#include <deque>
#include <functional>
#include <initializer_list>
#include <vector>

#include "anw/numeric/tensor.hpp"

namespace anw {

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape
/// lives, as are references returned by value().
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape* tape() const noexcept { return tape_; }
  int id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr && id_ >= 0; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Single-use reverse-mode tape. Nodes are appended in evaluation order, so a
/// reverse sweep over the node list is a valid topological order.
///
/// Ops in ops.hpp record a backward closure only when at least one input
/// requires a gradient; constants and no-grad tapes cost one tensor per node.
class Tape {
 public:
  /// Receives the adjoint of the node's output; accumulates into its inputs.
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const noexcept { return grad_enabled_; }

  Var constant(Tensor value);
  /// Leaf whose adjoint is reported by grad() after backward().
  Var parameter(Tensor value);

  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);

  bool requires_grad(Var v) const;
  const Tensor& value(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Accumulation buffer for `v`, zero-initialized on first use.
  Tensor& grad_buffer(Var v);

  /// Reverse sweep from a scalar loss recorded on this tape. Throws
  /// std::invalid_argument when the loss belongs to another tape or is not a
  /// single element.
  void backward(Var loss);

  /// Adjoint after backward(); zeros of matching shape for untouched parameters.
  const Tensor& grad(Var v) const;

  /// Running hash of the branch taken by every piecewise-linear op recorded
  /// so far. Two evaluations with equal signatures lie on the same linear
  /// piece, which finite-difference checks use to detect kinks.
  std::uint64_t branch_signature() const noexcept { return branch_signature_; }
  void mix_branch_signature(std::uint64_t bits) noexcept;

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
    bool is_parameter = false;
  };

  void check(Var v) const;

  std::deque<Node> nodes_;  // stable addresses: value() references survive new nodes
  bool grad_enabled_ = true;
  bool backward_done_ = false;
  std::uint64_t branch_signature_ = 0xcbf29ce484222325ull;
};

}  // namespace anw
