#include "stc/train/plotdata.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "stc/nets/temporal_conv.hpp"
#include "stc/objectives/losses.hpp"
#include "stc/util/kv.hpp"

namespace stc::train {

namespace {

struct SideFit {
  wpm::FitResult left;
  wpm::FitResult right;
};

SideFit refit(const Prediction& p, const wpm::WindowProposal& w, const TrainConfig& cfg) {
  const auto probs = p.probabilities.data();
  const auto opts = proposal_options(cfg).fit;
  return {wpm::fit_side_gaussian(probs, w.peak, wpm::Side::left, opts),
          wpm::fit_side_gaussian(probs, w.peak, wpm::Side::right, opts)};
}

void require_localization(const Prediction& p, const char* what) {
  if (!p.has_localization) throw std::invalid_argument(std::string(what) + ": the run's mode has no localization output");
}

}  // namespace

std::string trace_csv(const Prediction& prediction, const synth::SynthVideo& video, const TrainConfig& cfg) {
  require_localization(prediction, "trace_csv");
  const std::size_t length = video.length();
  const auto reference = objectives::gaussian_reference(length, video.timestamp, cfg.delta);
  std::vector<double> fitted(length, 0.0);
  std::vector<int> in_window(length, 0);
  for (const auto& w : prediction.windows) {
    for (std::size_t j = w.left; j < w.right; ++j) in_window[j] = 1;
    if (w.fallback || !(w.sigma_left > 0.0 && w.sigma_right > 0.0)) continue;
    const auto fit = refit(prediction, w, cfg);
    for (std::size_t j = 0; j < length; ++j) {
      const bool left = j <= w.peak;
      const auto& f = left ? fit.left : fit.right;
      const double d = static_cast<double>(j) - static_cast<double>(w.peak);
      const double sigma = left ? w.sigma_left : w.sigma_right;
      fitted[j] = std::max(fitted[j], f.amplitude * std::exp(-d * d / (2.0 * sigma * sigma)));
    }
  }
  std::ostringstream os;
  os << "frame,y_p,reference,fitted,in_window,in_segment\n";
  for (std::size_t j = 0; j < length; ++j) {
    const bool in_segment = j >= video.segment_begin && j < video.segment_end;
    os << j << ',' << kv::format_double(prediction.probabilities[j]) << ',' << kv::format_double(reference[j]) << ','
       << kv::format_double(fitted[j]) << ',' << in_window[j] << ',' << (in_segment ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string proposals_csv(const Prediction& prediction, const synth::SynthVideo& video, const TrainConfig& cfg) {
  require_localization(prediction, "proposals_csv");
  std::ostringstream os;
  os << "video,peak,height,amplitude_left,sigma_left,amplitude_right,sigma_right,left,right,fallback,"
        "left_converged,right_converged,grade\n";
  for (std::size_t i = 0; i < prediction.windows.size(); ++i) {
    const auto& w = prediction.windows[i];
    double a_left = w.peak_height, a_right = w.peak_height;
    if (!w.fallback) {
      const auto fit = refit(prediction, w, cfg);
      a_left = fit.left.amplitude;
      a_right = fit.right.amplitude;
    }
    const auto& logits = prediction.proposals[i].logits;
    const auto grade = nets::argmax(std::span<const double>(logits).subspan(1)) + 1;
    os << video.id << ',' << w.peak << ',' << kv::format_double(w.peak_height) << ',' << kv::format_double(a_left) << ','
       << kv::format_double(w.sigma_left) << ',' << kv::format_double(a_right) << ',' << kv::format_double(w.sigma_right)
       << ',' << w.left << ',' << w.right << ',' << (w.fallback ? 1 : 0) << ',' << (w.left_converged ? 1 : 0) << ','
       << (w.right_converged ? 1 : 0) << ',' << grade << '\n';
  }
  return os.str();
}

}  // namespace stc::train
