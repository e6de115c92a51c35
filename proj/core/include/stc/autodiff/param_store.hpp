#pragma once

#include <map>
#include <string>
#include <string_view>

#include "stc/autodiff/tensor.hpp"

namespace stc::ad {

struct Parameter {
  Tensor value;
  Tensor grad;
  bool trainable = true;
};

/// Named, ordered collection of model parameters and their gradients.
/// Iteration order is lexicographic by name, which keeps every consumer
/// (optimizer, checkpoint writer, gradient checker) deterministic.
class ParamStore {
 public:
  using Map = std::map<std::string, Parameter, std::less<>>;

  Parameter& add(std::string name, Tensor init, bool trainable = true);
  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  void zero_grad();
  /// Sets the trainable flag on every entry whose name starts with prefix.
  /// Returns the number of entries touched.
  std::size_t set_trainable(std::string_view prefix, bool trainable);
  std::size_t trainable_count() const;

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  Map::iterator begin() { return entries_.begin(); }
  Map::iterator end() { return entries_.end(); }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

  /// True when names, shapes, flags and values all match bit-for-bit.
  bool same_values(const ParamStore& other) const;
  /// Same as same_values restricted to entries under prefix.
  bool same_values(const ParamStore& other, std::string_view prefix) const;

 private:
  Map entries_;
};

}  // namespace stc::ad
