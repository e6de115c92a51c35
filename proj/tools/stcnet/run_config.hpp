#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stc/eval/metrics.hpp"
#include "stc/synth/dataset.hpp"
#include "stc/train/config.hpp"

namespace stcnet {

/// Everything a command needs: generator settings ("synth." keys),
/// training settings (bare keys) and evaluation settings.
struct RunConfig {
  stc::synth::SynthConfig synth;
  stc::train::TrainConfig train;
  stc::eval::Averaging averaging = stc::eval::Averaging::macro;
  /// Seeds an ablation cell is averaged over.
  std::vector<std::uint64_t> seeds{0};
  /// Number of held-out videos traced by plotdata.
  std::size_t plot_videos = 3;
};

/// Throws std::invalid_argument for unknown keys or malformed values.
void apply(RunConfig& cfg, std::string_view key, std::string_view value);

/// Sets both the generator seed and the training seed.
void set_seed(RunConfig& cfg, std::uint64_t seed);

/// Loads the key-value file (if any), applies the common seed (if any),
/// then the overrides in order, and validates the result.
RunConfig resolve(const std::optional<std::filesystem::path>& file, std::optional<std::uint64_t> seed,
                  const std::vector<std::pair<std::string, std::string>>& overrides);

/// Fully resolved configuration in the same grammar it was read from.
std::string echo(const RunConfig& cfg);

/// Splits "--key=value" arguments; anything else is rejected.
std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& args);

}  // namespace stcnet
