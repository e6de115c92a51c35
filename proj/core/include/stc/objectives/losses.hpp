#pragma once

#include <cstddef>
#include <span>

#include "stc/autodiff/ops.hpp"

namespace stc::objectives {

/// Probability clamp applied before every log in the BCE term.
inline constexpr double kProbabilityEpsilon = 1e-7;

/// exp(-(j - t)^2 / (2 delta^2)) for j in [0, T).
ad::Tensor gaussian_reference(std::size_t length, std::size_t t, double delta);

/// Timestamp BCE with a neutral zone:
///   -log p[t] - 1/(T-1) * sum_{|j - t| > 3 delta} log(1 - p[j])
/// The normaliser stays T-1 regardless of how many frames are summed.
/// probs: [T] sigmoid outputs. For T == 1 only the positive term remains.
ad::Var bce_loss(const ad::Var& probs, std::size_t t, double delta);

/// 1 - cos(softmax(scores), N(t, delta^2)). scores: [T] raw scores.
ad::Var cosine_loss(const ad::Var& scores, std::size_t t, double delta);

struct LocalizationLossOptions {
  double alpha = 1.0;
  bool use_bce = true;
  bool use_cos = true;
};

/// L_bce + alpha * L_cos, with either term switchable off for ablations.
ad::Var localization_loss(const ad::Var& scores, const ad::Var& probs, std::size_t t, double delta,
                          const LocalizationLossOptions& options = {});

/// -log softmax(logits)[target].
ad::Var cross_entropy(const ad::Var& logits, std::size_t target);

/// Background-aware grading loss over M proposals. logits[i] is the pooled
/// [C+1] vector of proposal i and peaks[i] its peak frame. The proposal whose
/// peak is closest to t (ties: smaller peak) is the positive with grade c;
/// the rest are pushed toward background (index 0) and averaged with
/// 1/(M-1). With include_background off, or M == 1, only the positive term
/// is used.
ad::Var grading_loss(std::span<const ad::Var> logits, std::span<const std::size_t> peaks, std::size_t t, int grade,
                     bool include_background = true);

/// Index of the positive proposal used by grading_loss.
std::size_t positive_proposal(std::span<const std::size_t> peaks, std::size_t t);

/// L_G + beta * L_L.
ad::Var total_loss(const ad::Var& grading, const ad::Var& localization, double beta);

}  // namespace stc::objectives
