#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stc::wpm {

struct Peak {
  std::size_t index = 0;
  double height = 0.0;
};

/// All local maxima of probs with height >= threshold, in ascending index
/// order. A maximal run of equal values is a maximum when both outside
/// neighbours are strictly lower (a missing neighbour at either end of the
/// signal counts as lower); the run reports its centre, rounded down. No
/// minimum-distance or prominence filtering is applied.
std::vector<Peak> detect_peaks(std::span<const double> probs, double threshold);

enum class Side { left, right };

struct FitOptions {
  double sigma_min = 2.0;
  /// 0 selects T (the signal length).
  double sigma_max = 0.0;
  double sigma_fallback = 30.0;
  /// 0 selects max(5, T / 50).
  double sigma_init = 0.0;
  int max_iterations = 100;
  double tolerance = 1e-8;
};

struct FitResult {
  double amplitude = 0.0;
  double sigma = 0.0;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Least-squares fit of A * exp(-(tau - mu)^2 / (2 sigma^2)) to one side of
/// the peak (tau in [0, mu] or [mu, T-1]) with mu held fixed, solved by
/// Levenberg-Marquardt over (A, sigma). A fit that lands below sigma_min
/// (or a side with fewer than two samples) reports sigma_min; a fit that
/// fails to converge or leaves [sigma_min, sigma_max] otherwise reports
/// sigma_fallback. Both fallbacks set converged = false.
FitResult fit_side_gaussian(std::span<const double> probs, std::size_t mu, Side side, const FitOptions& options = {});

struct WindowProposal {
  std::size_t peak = 0;
  double peak_height = 0.0;
  double sigma_left = 0.0;
  double sigma_right = 0.0;
  std::size_t left = 0;   // inclusive
  std::size_t right = 0;  // exclusive
  bool fallback = false;  // no peak cleared the threshold
  bool left_converged = false;
  bool right_converged = false;

  std::size_t length() const noexcept { return right - left; }
};

/// Window bounds around a peak: round-half-away(mu -/+ n_std * sigma),
/// clamped to [0, T]. Windows narrower than min(2, T) frames are widened
/// one frame at a time on each side, and the peak frame is always kept
/// inside [left, right).
WindowProposal make_window(std::size_t mu, double sigma_left, double sigma_right, double n_std, std::size_t length);

struct ProposalOptions {
  double n_std = 2.0;
  double threshold = 0.5;
  FitOptions fit;
  /// Keep only the highest peaks when positive. 0 keeps all of them.
  std::size_t max_proposals = 0;
};

/// One dynamic window per detected peak; if nothing clears the threshold,
/// a single fallback window at argmax(probs) with sigma_fallback on both
/// sides. Always returns at least one proposal.
std::vector<WindowProposal> propose_windows(std::span<const double> probs, const ProposalOptions& options);

/// Ablation: windows of a fixed width centred on the same peaks
/// ([mu - width/2, mu + width/2), clamped).
std::vector<WindowProposal> fixed_windows(std::span<const double> probs, std::size_t width, const ProposalOptions& options);

}  // namespace stc::wpm
