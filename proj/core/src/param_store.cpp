#include "stc/autodiff/param_store.hpp"

#include <cstring>
#include <stdexcept>

namespace stc::ad {

Parameter& ParamStore::add(std::string name, Tensor init, bool trainable) {
  if (entries_.contains(name)) throw std::invalid_argument("parameter '" + name + "' already exists");
  Tensor grad(init.shape(), 0.0);
  auto [it, ok] = entries_.emplace(std::move(name), Parameter{std::move(init), std::move(grad), trainable});
  return it->second;
}

Parameter& ParamStore::at(std::string_view name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

const Parameter& ParamStore::at(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

bool ParamStore::contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }

void ParamStore::zero_grad() {
  for (auto& [name, p] : entries_) p.grad.fill(0.0);
}

std::size_t ParamStore::set_trainable(std::string_view prefix, bool trainable) {
  std::size_t n = 0;
  for (auto& [name, p] : entries_) {
    if (name.starts_with(prefix)) {
      p.trainable = trainable;
      ++n;
    }
  }
  return n;
}

std::size_t ParamStore::trainable_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : entries_) n += p.trainable ? 1 : 0;
  return n;
}

namespace {

bool bit_equal(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  return a.size() == 0 || std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

bool ParamStore::same_values(const ParamStore& other) const { return same_values(other, ""); }

bool ParamStore::same_values(const ParamStore& other, std::string_view prefix) const {
  auto count_prefixed = [&](const ParamStore& s) {
    std::size_t n = 0;
    for (const auto& [name, p] : s.entries_) n += name.starts_with(prefix) ? 1 : 0;
    return n;
  };
  if (count_prefixed(*this) != count_prefixed(other)) return false;
  for (const auto& [name, p] : entries_) {
    if (!name.starts_with(prefix)) continue;
    auto it = other.entries_.find(name);
    if (it == other.entries_.end()) return false;
    if (!bit_equal(p.value, it->second.value)) return false;
  }
  return true;
}

}  // namespace stc::ad
