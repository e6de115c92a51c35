#include "stc/autodiff/tape.hpp"

#include <stdexcept>

namespace stc::ad {

const Tensor& Var::value() const {
  if (!tape_) throw std::logic_error("Var: use of an unbound variable");
  return tape_->value(id_);
}

bool Var::requires_grad() const { return tape_ && tape_->requires_grad(id_); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::check_owned(const Var& v, const char* op) const {
  if (v.tape() != this) throw std::logic_error(std::string(op) + ": variable belongs to a different tape");
}

Var Tape::constant(Tensor value) { return push(Node{std::move(value), {}, {}, {}, false}); }

Var Tape::variable(Tensor value) { return push(Node{std::move(value), {}, {}, {}, true}); }

Var Tape::param(const std::string& name) {
  if (!store_) throw std::logic_error("Tape::param: tape has no parameter store");
  if (auto it = param_ids_.find(name); it != param_ids_.end()) return Var(this, it->second);
  const auto& p = store_->at(name);
  // Parameters read through a const store never require gradients.
  auto v = push(Node{p.value, {}, {}, name, p.trainable && mutable_store_ != nullptr});
  param_ids_.emplace(name, v.id());
  return v;
}

Var Tape::record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward) {
  bool needs = false;
  for (auto id : parents) {
    if (id >= nodes_.size()) throw std::logic_error("Tape::record: parent id out of range");
    needs = needs || nodes_[id].requires_grad;
  }
  Node node{std::move(value), {}, {}, {}, needs};
  if (needs) node.backward = std::move(backward);
  return push(std::move(node));
}

Tensor& Tape::grad_buffer(std::size_t id) {
  auto& node = nodes_[id];
  if (node.grad.empty()) node.grad = Tensor(node.value.shape(), 0.0);
  return node.grad;
}

const Tensor& Tape::grad(const Var& v) const {
  check_owned(v, "Tape::grad");
  return nodes_[v.id()].grad;
}

void Tape::backward(const Var& loss) {
  check_owned(loss, "backward");
  if (loss.value().size() != 1) {
    throw ShapeError("backward", "loss must be a scalar, got " + to_string(loss.shape()));
  }
  if (backward_done_) throw std::logic_error("backward: tape already differentiated");
  backward_done_ = true;
  if (!nodes_[loss.id()].requires_grad) return;

  grad_buffer(loss.id())[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    auto& node = nodes_[i];
    if (!node.requires_grad || node.grad.empty() || !node.backward) continue;
    node.backward(*this, i);
  }
  if (!mutable_store_) return;
  for (const auto& [name, id] : param_ids_) {
    const auto& node = nodes_[id];
    auto& p = mutable_store_->at(name);
    if (!p.trainable || node.grad.empty()) continue;
    auto dst = p.grad.data();
    auto src = node.grad.data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

}  // namespace stc::ad
