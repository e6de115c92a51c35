#pragma once

#include <string>

#include "stc/synth/dataset.hpp"
#include "stc/train/config.hpp"
#include "stc/train/pipeline.hpp"

namespace stc::train {

/// Per-frame trace for one video: frame, y_p, reference (the N(t, delta^2)
/// target), fitted (largest two-sided Gaussian fitted at any proposal
/// peak), in_window (1 inside any proposal), in_segment (1 inside the
/// planted segment). One row per frame. Requires a localizing mode.
std::string trace_csv(const Prediction& prediction, const synth::SynthVideo& video, const TrainConfig& cfg);

/// One row per proposal: peak, height, fitted amplitudes and sigmas, the
/// window bounds, fallback and convergence flags, and the pooled grade.
std::string proposals_csv(const Prediction& prediction, const synth::SynthVideo& video, const TrainConfig& cfg);

}  // namespace stc::train
