#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "stc/autodiff/param_store.hpp"

namespace stc::train {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam. Each parameter keeps its own step counter, which
/// only advances on steps where the parameter is trainable, so a module
/// that starts training late gets a fresh bias correction.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  /// Updates every trainable parameter from its accumulated gradient.
  /// Gradients are left untouched; call ParamStore::zero_grad() afterwards.
  void step(ad::ParamStore& params);

  std::uint64_t steps(const std::string& name) const;
  const AdamOptions& options() const noexcept { return options_; }
  void set_learning_rate(double lr) noexcept { options_.learning_rate = lr; }

 private:
  struct Slot {
    ad::Tensor m;
    ad::Tensor v;
    std::uint64_t t = 0;
  };
  AdamOptions options_;
  std::map<std::string, Slot, std::less<>> slots_;
};

}  // namespace stc::train
