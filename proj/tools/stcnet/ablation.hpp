#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "stc/synth/dataset.hpp"
#include "stcnet/run_config.hpp"

namespace stcnet {

/// Valid sweep names: losses, schemes, consensus, wpm, baselines, all.
const std::vector<std::string>& ablation_keys();

struct AblationRow {
  std::string group;    // sweep the row belongs to
  std::string setting;  // what differs from the base configuration
  std::size_t seeds = 0;
  // Means over seeds of the held-out report scalars.
  double accuracy = 0.0;
  double accuracy_std = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double average_distance = 0.0;
  double mae = 0.0;  // NaN for modes without localization
  double mean_iou = 0.0;
};

using DatasetSource = std::function<const stc::synth::Dataset&(std::uint64_t seed)>;
using ProgressFn = std::function<void(const std::string&)>;

/// Runs every cell of the named sweep over cfg.seeds. Cells that share a
/// training configuration are trained once. Throws std::invalid_argument
/// naming the valid keys for an unknown sweep.
std::vector<AblationRow> run_ablation(const RunConfig& cfg, std::string_view key, const DatasetSource& datasets,
                                      const ProgressFn& progress = {});

std::string ablation_csv(const std::vector<AblationRow>& rows);
std::string ablation_table(const std::vector<AblationRow>& rows);

}  // namespace stcnet
