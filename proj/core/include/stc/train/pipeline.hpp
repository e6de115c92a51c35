#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "stc/autodiff/ops.hpp"
#include "stc/autodiff/param_store.hpp"
#include "stc/nets/consensus.hpp"
#include "stc/nets/temporal_conv.hpp"
#include "stc/synth/dataset.hpp"
#include "stc/train/config.hpp"
#include "stc/util/rng.hpp"
#include "stc/wpm/window_proposal.hpp"

namespace stc::train {

/// What a training step optimizes.
enum class Stage {
  localization,  // L_L only; the grading module is not evaluated
  joint,         // L_G + beta * L_L
  grading,       // L_G only (separate scheme after the warm-up, and the baselines)
};

std::string_view to_string(Stage s);
Stage stage_for_epoch(const TrainConfig& cfg, std::size_t epoch);

/// The localization and grading networks for one configuration.
class Model {
 public:
  Model(const TrainConfig& cfg, std::size_t input_dim, std::size_t classes);

  /// Adds freshly initialised parameters (LM first, then GM) drawn from the seed.
  void init(ad::ParamStore& store, std::uint64_t seed) const;
  /// Throws if store lacks a parameter or holds one with the wrong shape.
  void check(const ad::ParamStore& store) const;

  const TrainConfig& config() const noexcept { return cfg_; }
  bool has_localization() const noexcept { return uses_localization(cfg_.mode); }
  const nets::LocalizationModule& lm() const noexcept { return lm_; }
  const nets::GradingModule& gm() const noexcept { return gm_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t classes() const noexcept { return classes_; }

 private:
  TrainConfig cfg_;
  std::size_t input_dim_;
  std::size_t classes_;
  nets::LocalizationModule lm_;
  nets::GradingModule gm_;
};

/// Symmetric w-frame window around t, clamped to [0, T).
wpm::WindowProposal trimmed_window(std::size_t t, std::size_t width, std::size_t length);

/// Candidate windows for a probability trace under the configured mode.
std::vector<wpm::WindowProposal> windows_for(const TrainConfig& cfg, std::span<const double> probs);

struct ForwardResult {
  ad::Var loss;               // the objective of the stage
  ad::Var localization_loss;  // invalid when the stage has none
  ad::Var grading_loss;       // invalid when the stage has none
  std::vector<wpm::WindowProposal> windows;
};

/// Training-mode forward pass for one video. dropout == nullptr disables dropout.
ForwardResult forward_video(ad::Tape& tape, const Model& model, const synth::SynthVideo& video, Stage stage,
                            Rng* dropout);

struct Prediction {
  bool has_localization = false;
  ad::Tensor scores;         // [T]; empty without localization
  ad::Tensor probabilities;  // [T]; empty without localization
  std::size_t predicted_timestamp = 0;
  std::vector<wpm::WindowProposal> windows;
  std::vector<nets::ProposalScore> proposals;  // aligned with windows
};

/// Eval-mode inference. The annotated timestamp is read only by the trimmed baseline.
Prediction predict(const ad::ParamStore& store, const Model& model, const synth::SynthVideo& video);

/// Video-level grade 1..C from a prediction.
int decide(const Prediction& prediction, const Model& model, nets::ConsensusStrategy strategy);

}  // namespace stc::train
