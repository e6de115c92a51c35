#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stc/autodiff/param_store.hpp"
#include "stc/eval/report.hpp"
#include "stc/synth/dataset.hpp"
#include "stc/train/config.hpp"
#include "stc/train/pipeline.hpp"

namespace stc::train {

struct EpochLog {
  std::size_t epoch = 0;
  Stage stage = Stage::joint;
  /// Means over the training videos of the epoch.
  double loss = 0.0;
  double localization_loss = 0.0;
  double grading_loss = 0.0;
  /// Held-out metrics after the epoch; NaN when not evaluated.
  double val_accuracy = 0.0;
  double val_mae = 0.0;
  double val_iou = 0.0;
};

struct TrainResult {
  ad::ParamStore params;
  std::vector<EpochLog> log;
  /// Epochs completed by the returned parameters.
  std::size_t epochs_completed = 0;
  std::uint64_t config_hash = 0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Fresh parameters for the configuration, drawn from cfg.seed.
ad::ParamStore initial_params(const synth::Dataset& dataset, const TrainConfig& cfg);

/// Batch-1 training over the training split in a per-epoch shuffled order.
/// Fully determined by (dataset, cfg).
TrainResult train(const synth::Dataset& dataset, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

std::vector<Prediction> predict_all(const ad::ParamStore& params, const Model& model,
                                    std::span<const synth::SynthVideo* const> videos);

/// Report for a set of predictions under one consensus strategy.
eval::EvalReport report_for(std::span<const Prediction> predictions, std::span<const synth::SynthVideo* const> videos,
                            const Model& model, nets::ConsensusStrategy strategy,
                            eval::Averaging averaging = eval::Averaging::macro);

/// Predicts every video of the split and scores it with cfg.consensus.
eval::EvalReport evaluate(const ad::ParamStore& params, const synth::Dataset& dataset, const TrainConfig& cfg,
                          bool train_split = false);

/// Trains with cfg switched to the given mode (baselines run end to end,
/// since they have no localization warm-up) and evaluates on the test split.
eval::EvalReport run_baseline(const synth::Dataset& dataset, Mode mode, TrainConfig cfg);

/// "epoch,stage,loss,loss_l,loss_g,val_accuracy,val_mae,val_iou" rows.
std::string log_csv(std::span<const EpochLog> log);

}  // namespace stc::train
