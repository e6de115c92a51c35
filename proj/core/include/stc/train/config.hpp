#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "stc/nets/consensus.hpp"
#include "stc/nets/temporal_conv.hpp"
#include "stc/wpm/window_proposal.hpp"

namespace stc::train {

enum class Scheme { two_stage, end_to_end, separate };

enum class Mode {
  stc,           // LM -> WPM -> GM
  full,          // GM over the whole video, C-way head, no timestamp
  trimmed,       // GM on a w-frame window around the annotated timestamp
  fixed_window,  // STC with windows of width w around each peak
  no_wpm,        // STC with the whole reweighted sequence as the only proposal
};

std::string_view to_string(Scheme s);
std::string_view to_string(Mode m);
std::optional<Scheme> parse_scheme(std::string_view s);
std::optional<Mode> parse_mode(std::string_view s);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t e_frozen = 8;
  double learning_rate = 1e-3;
  double alpha = 1.0;
  double beta = 1.0;
  double delta = 50.0;
  double n_std = 2.0;
  double threshold = 0.5;
  std::size_t topk = 8;
  /// Cap on proposals per video (highest peaks kept); 0 = no cap.
  std::size_t max_proposals = 0;
  Scheme scheme = Scheme::two_stage;
  Mode mode = Mode::stc;
  /// Window width for trimmed and fixed_window modes.
  std::size_t window = 0;
  nets::ConsensusStrategy consensus = nets::ConsensusStrategy::highest_peak;
  bool use_bce = true;
  bool use_cos = true;
  bool use_bg = true;
  /// Keep the epoch with the best validation accuracy instead of the last.
  bool select_best = false;
  /// Evaluate on the held-out split after every epoch (needed for select_best).
  bool validate_each_epoch = true;
  std::uint64_t seed = 0;

  std::size_t lm_layers = 5;
  std::size_t lm_width = 64;
  double lm_dropout = 0.0;
  std::size_t gm_layers = 2;
  std::size_t gm_width = 64;
  double gm_dropout = 0.2;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Rejects inconsistent settings (invalid ranges, mode/scheme conflicts).
void validate(const TrainConfig& cfg);

/// Whether the mode runs the localization module at all.
bool uses_localization(Mode m);

nets::LMConfig lm_config(const TrainConfig& cfg, std::size_t input_dim);
nets::GMConfig gm_config(const TrainConfig& cfg, std::size_t input_dim, std::size_t classes);
wpm::ProposalOptions proposal_options(const TrainConfig& cfg);

/// Applies one "key = value" setting. Returns false for keys this struct
/// does not own; throws std::invalid_argument for malformed values.
bool apply(TrainConfig& cfg, std::string_view key, std::string_view value);
/// Every setting in "key = value" form, in a fixed order.
std::string config_echo(const TrainConfig& cfg);

/// Hash of the settings that determine parameter names and shapes.
std::uint64_t architecture_hash(const TrainConfig& cfg, std::size_t input_dim, std::size_t classes);

}  // namespace stc::train
