#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stc/autodiff/param_store.hpp"
#include "stc/autodiff/tape.hpp"

namespace stc::ad {

/// Builds a scalar loss on the given tape, reading parameters via
/// tape.param(). Must be deterministic (no dropout).
using LossBuilder = std::function<Var(Tape&)>;

struct ParamGradError {
  std::string name;
  /// max_i |analytic_i - numeric_i| / max(max_i |analytic_i|, max_i |numeric_i|, 1e-6)
  double relative_error = 0.0;
  double absolute_error = 0.0;
};

struct GradCheckReport {
  std::vector<ParamGradError> params;
  double max_relative_error = 0.0;
  bool passed = true;
};

/// Compares analytic gradients of every trainable parameter against central
/// differences with the given step. Relative error is taken per parameter
/// tensor in the infinity norm, which stays meaningful for entries whose
/// gradient is near zero. Parameter values are restored on return; the
/// store's gradients hold the analytic result.
///
/// Throws std::runtime_error if two forward evaluations at the same point
/// disagree.
GradCheckReport finite_difference_check(ParamStore& store, const LossBuilder& loss_fn, double step = 1e-5,
                                        double tolerance = 1e-4);

}  // namespace stc::ad
