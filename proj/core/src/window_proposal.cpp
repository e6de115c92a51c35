#include "stc/wpm/window_proposal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stc::wpm {

std::vector<Peak> detect_peaks(std::span<const double> probs, double threshold) {
  std::vector<Peak> peaks;
  const std::size_t n = probs.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && probs[j + 1] == probs[i]) ++j;
    const bool left_lower = i == 0 || probs[i - 1] < probs[i];
    const bool right_lower = j + 1 == n || probs[j + 1] < probs[i];
    if (left_lower && right_lower && probs[i] >= threshold) peaks.push_back({(i + j) / 2, probs[i]});
    i = j + 1;
  }
  return peaks;
}

namespace {

struct SideSamples {
  std::vector<double> offset;  // tau - mu
  std::vector<double> value;
};

SideSamples side_samples(std::span<const double> probs, std::size_t mu, Side side) {
  SideSamples s;
  const std::size_t begin = side == Side::left ? 0 : mu;
  const std::size_t end = side == Side::left ? mu + 1 : probs.size();
  for (std::size_t tau = begin; tau < end; ++tau) {
    s.offset.push_back(static_cast<double>(tau) - static_cast<double>(mu));
    s.value.push_back(probs[tau]);
  }
  return s;
}

double sum_sq_residual(const SideSamples& s, double amp, double sigma) {
  double sse = 0.0;
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (std::size_t i = 0; i < s.offset.size(); ++i) {
    const double r = s.value[i] - amp * std::exp(-s.offset[i] * s.offset[i] * inv);
    sse += r * r;
  }
  return sse;
}

// Fits below this fraction of sigma_min are abandoned early: the model is
// collapsing onto a single-frame spike.
constexpr double kCollapseFraction = 0.5;
constexpr double kSseFloor = 1e-28;
constexpr double kLambdaCeiling = 1e16;

}  // namespace

FitResult fit_side_gaussian(std::span<const double> probs, std::size_t mu, Side side, const FitOptions& options) {
  if (mu >= probs.size()) throw std::invalid_argument("fit_side_gaussian: peak index out of range");
  const double length = static_cast<double>(probs.size());
  const double sigma_max = options.sigma_max > 0.0 ? options.sigma_max : length;

  FitResult result;
  result.amplitude = probs[mu];
  const SideSamples samples = side_samples(probs, mu, side);
  if (samples.offset.size() < 2) {
    result.sigma = options.sigma_min;
    return result;
  }

  double amp = probs[mu];
  double sigma = options.sigma_init > 0.0 ? options.sigma_init : std::max(5.0, length / 50.0);
  double sse = sum_sq_residual(samples, amp, sigma);
  double lambda = 1e-3;
  bool converged = false;
  bool collapsed = false;
  int iter = 0;

  while (iter < options.max_iterations && !converged) {
    ++iter;
    // Normal equations J^T J and J^T r for the model g = A e, e = exp(-d^2 / 2 sigma^2).
    double jaa = 0.0, jas = 0.0, jss = 0.0, ga = 0.0, gs = 0.0;
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (std::size_t i = 0; i < samples.offset.size(); ++i) {
      const double d2 = samples.offset[i] * samples.offset[i];
      const double e = std::exp(-d2 * inv);
      const double da = e;
      const double ds = amp * e * d2 / (sigma * sigma * sigma);
      const double r = samples.value[i] - amp * e;
      jaa += da * da;
      jas += da * ds;
      jss += ds * ds;
      ga += da * r;
      gs += ds * r;
    }

    bool accepted = false;
    while (!accepted && lambda < kLambdaCeiling) {
      const double a11 = jaa + lambda * std::max(jaa, 1e-12);
      const double a22 = jss + lambda * std::max(jss, 1e-12);
      const double det = a11 * a22 - jas * jas;
      if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
        lambda *= 10.0;
        continue;
      }
      const double step_a = (a22 * ga - jas * gs) / det;
      const double step_s = (a11 * gs - jas * ga) / det;
      const double next_amp = amp + step_a;
      const double next_sigma = sigma + step_s;
      if (!(next_sigma > 0.0) || !std::isfinite(next_amp) || !std::isfinite(next_sigma)) {
        lambda *= 10.0;
        continue;
      }
      const double next_sse = sum_sq_residual(samples, next_amp, next_sigma);
      if (next_sse < sse) {
        const double rel_change = (sse - next_sse) / sse;
        amp = next_amp;
        sigma = next_sigma;
        sse = next_sse;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (rel_change < options.tolerance || sse < kSseFloor) converged = true;
      } else {
        lambda *= 10.0;
      }
    }
    // No step improves the residual any further: stationary to working precision.
    if (!accepted) converged = true;
    if (sigma < kCollapseFraction * options.sigma_min) {
      collapsed = true;
      break;
    }
  }

  result.iterations = iter;
  result.amplitude = amp;
  result.residual_norm = std::sqrt(sse);
  if (collapsed || (converged && sigma < options.sigma_min)) {
    result.sigma = options.sigma_min;
    result.converged = false;
  } else if (!converged || sigma > sigma_max) {
    result.sigma = options.sigma_fallback;
    result.converged = false;
  } else {
    result.sigma = sigma;
    result.converged = true;
  }
  return result;
}

namespace {

double round_half_away(double v) { return v < 0.0 ? -std::floor(-v + 0.5) : std::floor(v + 0.5); }

WindowProposal bounded_window(std::size_t mu, double left_extent, double right_extent, std::size_t length) {
  if (length == 0) throw std::invalid_argument("make_window: empty signal");
  if (mu >= length) throw std::invalid_argument("make_window: peak index out of range");
  const double m = static_cast<double>(mu);
  const double len = static_cast<double>(length);
  auto l = static_cast<std::size_t>(std::clamp(round_half_away(m - left_extent), 0.0, len));
  auto r = static_cast<std::size_t>(std::clamp(round_half_away(m + right_extent), 0.0, len));
  l = std::min(l, mu);
  r = std::max(r, mu + 1);
  const std::size_t min_width = std::min<std::size_t>(2, length);
  while (r - l < min_width) {
    if (l > 0) --l;
    if (r - l < min_width && r < length) ++r;
  }
  WindowProposal w;
  w.peak = mu;
  w.left = l;
  w.right = r;
  return w;
}

std::vector<Peak> select_peaks(std::span<const double> probs, const ProposalOptions& options) {
  auto peaks = detect_peaks(probs, options.threshold);
  if (options.max_proposals > 0 && peaks.size() > options.max_proposals) {
    std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
    peaks.resize(options.max_proposals);
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.index < b.index; });
  }
  return peaks;
}

std::size_t first_argmax(std::span<const double> probs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

}  // namespace

WindowProposal make_window(std::size_t mu, double sigma_left, double sigma_right, double n_std, std::size_t length) {
  auto w = bounded_window(mu, n_std * sigma_left, n_std * sigma_right, length);
  w.sigma_left = sigma_left;
  w.sigma_right = sigma_right;
  return w;
}

std::vector<WindowProposal> propose_windows(std::span<const double> probs, const ProposalOptions& options) {
  if (probs.empty()) throw std::invalid_argument("propose_windows: empty signal");
  std::vector<WindowProposal> out;
  for (const auto& peak : select_peaks(probs, options)) {
    const auto left = fit_side_gaussian(probs, peak.index, Side::left, options.fit);
    const auto right = fit_side_gaussian(probs, peak.index, Side::right, options.fit);
    auto w = make_window(peak.index, left.sigma, right.sigma, options.n_std, probs.size());
    w.peak_height = peak.height;
    w.left_converged = left.converged;
    w.right_converged = right.converged;
    out.push_back(w);
  }
  if (out.empty()) {
    const std::size_t mu = first_argmax(probs);
    const double s = options.fit.sigma_fallback;
    auto w = make_window(mu, s, s, options.n_std, probs.size());
    w.peak_height = probs[mu];
    w.fallback = true;
    out.push_back(w);
  }
  return out;
}

std::vector<WindowProposal> fixed_windows(std::span<const double> probs, std::size_t width,
                                          const ProposalOptions& options) {
  if (probs.empty()) throw std::invalid_argument("fixed_windows: empty signal");
  if (width == 0) throw std::invalid_argument("fixed_windows: width must be positive");
  const double half = static_cast<double>(width) / 2.0;
  std::vector<WindowProposal> out;
  for (const auto& peak : select_peaks(probs, options)) {
    auto w = bounded_window(peak.index, half, half, probs.size());
    w.peak_height = peak.height;
    out.push_back(w);
  }
  if (out.empty()) {
    const std::size_t mu = first_argmax(probs);
    auto w = bounded_window(mu, half, half, probs.size());
    w.peak_height = probs[mu];
    w.fallback = true;
    out.push_back(w);
  }
  return out;
}

}  // namespace stc::wpm
