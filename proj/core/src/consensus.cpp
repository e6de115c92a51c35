#include "stc/nets/consensus.hpp"

#include <stdexcept>

namespace stc::nets {

std::string_view to_string(ConsensusStrategy s) {
  switch (s) {
    case ConsensusStrategy::highest_peak: return "highest_peak";
    case ConsensusStrategy::average: return "average";
    case ConsensusStrategy::majority_vote: return "majority_vote";
    case ConsensusStrategy::highest_confidence: return "highest_confidence";
  }
  return "unknown";
}

std::optional<ConsensusStrategy> parse_consensus(std::string_view name) {
  for (auto s : all_consensus_strategies()) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::vector<ConsensusStrategy> all_consensus_strategies() {
  return {ConsensusStrategy::average, ConsensusStrategy::majority_vote, ConsensusStrategy::highest_confidence,
          ConsensusStrategy::highest_peak};
}

namespace {

int best_grade(std::span<const double> logits) {
  std::size_t best = 1;
  for (std::size_t j = 2; j < logits.size(); ++j) {
    if (logits[j] > logits[best]) best = j;
  }
  return static_cast<int>(best);
}

}  // namespace

int consensus(std::span<const ProposalScore> proposals, ConsensusStrategy strategy) {
  if (proposals.empty()) throw std::invalid_argument("consensus: empty proposal list");
  const std::size_t width = proposals.front().logits.size();
  if (width < 3) throw std::invalid_argument("consensus: need background plus at least two grade logits");
  for (const auto& p : proposals) {
    if (p.logits.size() != width) throw std::invalid_argument("consensus: proposals disagree on logit count");
  }

  std::vector<double> mean(width, 0.0);
  for (const auto& p : proposals) {
    for (std::size_t j = 0; j < width; ++j) mean[j] += p.logits[j] / static_cast<double>(proposals.size());
  }

  switch (strategy) {
    case ConsensusStrategy::highest_peak: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < proposals.size(); ++i) {
        if (proposals[i].peak_score > proposals[best].peak_score) best = i;
      }
      return best_grade(proposals[best].logits);
    }
    case ConsensusStrategy::average:
      return best_grade(mean);
    case ConsensusStrategy::majority_vote: {
      std::vector<int> votes(width, 0);
      for (const auto& p : proposals) ++votes[static_cast<std::size_t>(best_grade(p.logits))];
      std::size_t best = 1;
      for (std::size_t j = 2; j < width; ++j) {
        if (votes[j] > votes[best] || (votes[j] == votes[best] && mean[j] > mean[best])) best = j;
      }
      return static_cast<int>(best);
    }
    case ConsensusStrategy::highest_confidence: {
      std::size_t best_p = 0, best_j = 1;
      for (std::size_t i = 0; i < proposals.size(); ++i) {
        for (std::size_t j = 1; j < width; ++j) {
          if (proposals[i].logits[j] > proposals[best_p].logits[best_j]) {
            best_p = i;
            best_j = j;
          }
        }
      }
      return static_cast<int>(best_j);
    }
  }
  throw std::invalid_argument("consensus: unknown strategy");
}

}  // namespace stc::nets
