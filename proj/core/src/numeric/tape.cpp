#include "anw/numeric/tape.hpp"

#include <stdexcept>

namespace anw {

const Tensor& Var::value() const {
  if (!valid()) throw std::invalid_argument("Var: invalid handle");
  return tape_->value(*this);
}

void Tape::check(Var v) const {
  if (v.tape_ != this || v.id_ < 0 || static_cast<std::size_t>(v.id_) >= nodes_.size()) {
    throw std::invalid_argument("Var is not recorded on this tape");
  }
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, false, false});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::parameter(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, grad_enabled_, true});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  bool needs = false;
  if (grad_enabled_) {
    for (Var in : inputs) {
      check(in);
      needs = needs || nodes_[static_cast<std::size_t>(in.id_)].requires_grad;
    }
  }
  Node node{std::move(value), {}, {}, needs, false};
  if (needs) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

bool Tape::requires_grad(Var v) const {
  check(v);
  return nodes_[static_cast<std::size_t>(v.id_)].requires_grad;
}

const Tensor& Tape::value(Var v) const {
  check(v);
  return nodes_[static_cast<std::size_t>(v.id_)].value;
}

Tensor& Tape::grad_buffer(Var v) {
  check(v);
  Node& n = nodes_[static_cast<std::size_t>(v.id_)];
  if (n.grad.shape() != n.value.shape() || n.grad.size() != n.value.size()) n.grad = Tensor::zeros_like(n.value);
  return n.grad;
}

void Tape::backward(Var loss) {
  check(loss);
  if (value(loss).size() != 1) throw std::invalid_argument("backward: loss must be a scalar");
  if (backward_done_) throw std::logic_error("backward: tape already consumed");
  backward_done_ = true;

  for (auto& n : nodes_) {
    if (n.is_parameter) n.grad = Tensor::zeros_like(n.value);
  }
  grad_buffer(loss).fill(1.0f);

  for (int id = loss.id_; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.backward || n.grad.size() == 0) continue;
    // The closure may append to other nodes' grads but never to this node's.
    const Tensor out_grad = std::move(n.grad);
    n.backward(*this, out_grad);
    n.grad = out_grad;
  }
}

const Tensor& Tape::grad(Var v) const {
  check(v);
  return nodes_[static_cast<std::size_t>(v.id_)].grad;
}

void Tape::mix_branch_signature(std::uint64_t bits) noexcept {
  branch_signature_ = (branch_signature_ ^ bits) * 0x100000001b3ull;
}

}  // namespace anw
