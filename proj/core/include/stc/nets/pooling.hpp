#pragma once

#include <cstddef>

#include "stc/autodiff/ops.hpp"

namespace stc::nets {

/// Confidence reweighting of a window: X~ = X * p + X, with p broadcast
/// across feature columns. Gradients reach both X and p.
ad::Var reweight(const ad::Var& features, const ad::Var& probabilities);

/// Per-class mean of the K largest frame logits: [T x C] -> [C].
/// When T < K all T frames are averaged. Ties among equal logits select
/// the earlier frame.
ad::Var topk_pool(const ad::Var& frame_logits, std::size_t k);

}  // namespace stc::nets
