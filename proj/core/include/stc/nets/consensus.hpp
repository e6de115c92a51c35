#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stc::nets {

enum class ConsensusStrategy { highest_peak, average, majority_vote, highest_confidence };

std::string_view to_string(ConsensusStrategy s);
std::optional<ConsensusStrategy> parse_consensus(std::string_view name);
/// All strategies in the order used by ablation tables.
std::vector<ConsensusStrategy> all_consensus_strategies();

/// One proposal's contribution to the video-level decision.
struct ProposalScore {
  double peak_score = 0.0;      // raw localization score at the proposal's peak
  std::vector<double> logits;   // C+1 pooled logits, index 0 = background
};

/// Video-level grade in 1..C. The background logit never wins.
///   highest_peak        grade of the proposal with the largest peak score
///   average             argmax of the mean logits
///   majority_vote       most frequent per-proposal grade; ties go to the
///                       tied grade with the highest mean logit
///   highest_confidence  grade owning the single largest grade logit
/// Remaining ties resolve to the earliest proposal / lowest grade.
int consensus(std::span<const ProposalScore> proposals, ConsensusStrategy strategy);

}  // namespace stc::nets
