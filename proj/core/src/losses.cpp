#include "stc/objectives/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace stc::objectives {

using ad::Tensor;
using ad::Var;

Tensor gaussian_reference(std::size_t length, std::size_t t, double delta) {
  if (length == 0) throw std::invalid_argument("gaussian_reference: empty sequence");
  if (!(delta > 0.0)) throw std::invalid_argument("gaussian_reference: delta must be positive");
  Tensor g({length});
  for (std::size_t j = 0; j < length; ++j) {
    const double d = static_cast<double>(j) - static_cast<double>(t);
    g[j] = std::exp(-d * d / (2.0 * delta * delta));
  }
  return g;
}

namespace {

void check_timestamp(const Var& v, std::size_t t, const char* op) {
  if (v.shape().size() != 1) throw ad::ShapeError(op, "expected a [T] vector, got " + ad::to_string(v.shape()));
  if (t >= v.shape()[0]) {
    throw std::out_of_range(std::string(op) + ": timestamp " + std::to_string(t) + " outside [0, " +
                            std::to_string(v.shape()[0]) + ")");
  }
}

}  // namespace

Var bce_loss(const Var& probs, std::size_t t, double delta) {
  check_timestamp(probs, t, "bce_loss");
  if (delta < 1.0) throw std::invalid_argument("bce_loss: delta must be at least 1");
  ad::Tape& tape = *probs.tape();
  const std::size_t length = probs.shape()[0];
  Var p = ad::clamp(probs, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  Var positive = ad::scale(ad::log(ad::select(p, t)), -1.0);
  if (length == 1) return positive;

  // Weight 1/(T-1) on frames outside the closed zone [t - 3 delta, t + 3 delta].
  const double zone = 3.0 * delta;
  Tensor weights({length}, 0.0);
  bool any = false;
  for (std::size_t j = 0; j < length; ++j) {
    const double d = std::abs(static_cast<double>(j) - static_cast<double>(t));
    if (d > zone) {
      weights[j] = 1.0 / static_cast<double>(length - 1);
      any = true;
    }
  }
  if (!any) return positive;
  Var log_neg = ad::log(ad::add_scalar(ad::scale(p, -1.0), 1.0));
  Var negative = ad::scale(ad::dot(log_neg, tape.constant(std::move(weights))), -1.0);
  return ad::add(positive, negative);
}

Var cosine_loss(const Var& scores, std::size_t t, double delta) {
  check_timestamp(scores, t, "cosine_loss");
  ad::Tape& tape = *scores.tape();
  Tensor ref = gaussian_reference(scores.shape()[0], t, delta);
  double ref_norm = 0.0;
  for (double v : ref.data()) ref_norm += v * v;
  ref_norm = std::sqrt(ref_norm);
  Var soft = ad::softmax(scores, 0);
  Var cosine = ad::div(ad::dot(soft, tape.constant(std::move(ref))), ad::scale(ad::l2_norm(soft), ref_norm));
  return ad::add_scalar(ad::scale(cosine, -1.0), 1.0);
}

Var localization_loss(const Var& scores, const Var& probs, std::size_t t, double delta,
                      const LocalizationLossOptions& options) {
  if (options.alpha < 0.0) throw std::invalid_argument("localization_loss: alpha must be non-negative");
  if (!options.use_bce && !options.use_cos) throw std::invalid_argument("localization_loss: both terms disabled");
  if (!options.use_cos) return bce_loss(probs, t, delta);
  Var cos = ad::scale(cosine_loss(scores, t, delta), options.alpha);
  if (!options.use_bce) return cos;
  return ad::add(bce_loss(probs, t, delta), cos);
}

Var cross_entropy(const Var& logits, std::size_t target) {
  if (logits.shape().size() != 1) throw ad::ShapeError("cross_entropy", "expected [C] logits, got " + ad::to_string(logits.shape()));
  if (target >= logits.shape()[0]) throw std::out_of_range("cross_entropy: target class out of range");
  return ad::scale(ad::select(ad::log_softmax(logits, 0), target), -1.0);
}

std::size_t positive_proposal(std::span<const std::size_t> peaks, std::size_t t) {
  if (peaks.empty()) throw std::invalid_argument("positive_proposal: no proposals");
  std::size_t best = 0;
  auto dist = [t](std::size_t mu) { return mu > t ? mu - t : t - mu; };
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    const auto d = dist(peaks[i]), db = dist(peaks[best]);
    if (d < db || (d == db && peaks[i] < peaks[best])) best = i;
  }
  return best;
}

Var grading_loss(std::span<const Var> logits, std::span<const std::size_t> peaks, std::size_t t, int grade,
                 bool include_background) {
  if (logits.empty()) throw std::invalid_argument("grading_loss: empty proposal set");
  if (logits.size() != peaks.size()) throw std::invalid_argument("grading_loss: logits and peaks differ in length");
  const std::size_t classes = logits.front().shape().at(0);
  if (grade < 1 || static_cast<std::size_t>(grade) >= classes) {
    throw std::out_of_range("grading_loss: grade " + std::to_string(grade) + " outside 1.." + std::to_string(classes - 1));
  }
  const std::size_t pos = positive_proposal(peaks, t);
  Var loss = cross_entropy(logits[pos], static_cast<std::size_t>(grade));
  if (!include_background || logits.size() == 1) return loss;
  Var background;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (i == pos) continue;
    Var term = cross_entropy(logits[i], 0);
    background = background.valid() ? ad::add(background, term) : term;
  }
  return ad::add(loss, ad::scale(background, 1.0 / static_cast<double>(logits.size() - 1)));
}

Var total_loss(const Var& grading, const Var& localization, double beta) {
  if (beta < 0.0) throw std::invalid_argument("total_loss: beta must be non-negative");
  return ad::add(grading, ad::scale(localization, beta));
}

}  // namespace stc::objectives
