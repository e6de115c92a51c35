#include "stc/autodiff/gradcheck.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace stc::ad {

namespace {

// Tensors whose gradients are all below this magnitude are compared
// absolutely; central differences carry ~1e-11 of round-off at step 1e-5.
constexpr double kMagnitudeFloor = 1e-6;

double evaluate(ParamStore& store, const LossBuilder& loss_fn) {
  Tape tape(&store);
  return loss_fn(tape).value().item();
}

}  // namespace

GradCheckReport finite_difference_check(ParamStore& store, const LossBuilder& loss_fn, double step, double tolerance) {
  GradCheckReport report;
  if (store.trainable_count() == 0) return report;

  const double first = evaluate(store, loss_fn);
  const double second = evaluate(store, loss_fn);
  if (std::bit_cast<std::uint64_t>(first) != std::bit_cast<std::uint64_t>(second)) {
    throw std::runtime_error("finite_difference_check: loss function is not deterministic");
  }

  store.zero_grad();
  {
    Tape tape(&store);
    tape.backward(loss_fn(tape));
  }

  for (auto& [name, p] : store) {
    if (!p.trainable) continue;
    double max_diff = 0.0, max_mag = 0.0;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + step;
      const double up = evaluate(store, loss_fn);
      p.value[i] = saved - step;
      const double down = evaluate(store, loss_fn);
      p.value[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p.grad[i];
      max_diff = std::max(max_diff, std::abs(analytic - numeric));
      max_mag = std::max({max_mag, std::abs(analytic), std::abs(numeric)});
    }
    ParamGradError e{name, max_diff / std::max(max_mag, kMagnitudeFloor), max_diff};
    report.max_relative_error = std::max(report.max_relative_error, e.relative_error);
    report.params.push_back(std::move(e));
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

}  // namespace stc::ad
