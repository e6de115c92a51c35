#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "stc/autodiff/param_store.hpp"
#include "stc/autodiff/tensor.hpp"

namespace stc::ad {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid as long as the
/// tape that produced it.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
  bool requires_grad() const;

  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Dynamic reverse-mode tape. A fresh tape is built for every forward pass;
/// parameters are pulled from a ParamStore and their gradients are
/// accumulated back into it by backward().
class Tape {
 public:
  /// Receives the tape and the id of the node being differentiated; must
  /// accumulate into the gradient buffers of the node's parents.
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  explicit Tape(ParamStore* store = nullptr) : store_(store), mutable_store_(store) {}
  /// Read-only tape for inference; backward() through parameters is rejected.
  explicit Tape(const ParamStore* store) : store_(store) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Unbound leaf that requires a gradient; read it back with grad().
  Var variable(Tensor value);
  /// Leaf bound to a store entry. Repeated calls with the same name return
  /// the same node, so gradients from every use accumulate once.
  Var param(const std::string& name);

  Var record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward);

  void backward(const Var& loss);
  const Tensor& grad(const Var& v) const;

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of a node, zero-allocated on first access.
  Tensor& grad_buffer(std::size_t id);
  std::size_t node_count() const noexcept { return nodes_.size(); }
  const ParamStore* store() const noexcept { return store_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    std::string param_name;
    bool requires_grad = false;
  };

  Var push(Node node);
  void check_owned(const Var& v, const char* op) const;

  std::deque<Node> nodes_;
  std::map<std::string, std::size_t> param_ids_;
  const ParamStore* store_ = nullptr;
  ParamStore* mutable_store_ = nullptr;
  bool backward_done_ = false;
};

}  // namespace stc::ad
