#include "stc/train/pipeline.hpp"

#include <stdexcept>

#include "stc/nets/pooling.hpp"
#include "stc/objectives/losses.hpp"

namespace stc::train {

using ad::Tape;
using ad::Var;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::localization: return "localization";
    case Stage::joint: return "joint";
    case Stage::grading: return "grading";
  }
  return "?";
}

Stage stage_for_epoch(const TrainConfig& cfg, std::size_t epoch) {
  if (!uses_localization(cfg.mode)) return Stage::grading;
  switch (cfg.scheme) {
    case Scheme::end_to_end: return Stage::joint;
    case Scheme::two_stage: return epoch < cfg.e_frozen ? Stage::localization : Stage::joint;
    case Scheme::separate: return epoch < cfg.e_frozen ? Stage::localization : Stage::grading;
  }
  return Stage::joint;
}

Model::Model(const TrainConfig& cfg, std::size_t input_dim, std::size_t classes)
    : cfg_(cfg),
      input_dim_(input_dim),
      classes_(classes),
      lm_(lm_config(cfg, input_dim)),
      gm_(gm_config(cfg, input_dim, classes)) {
  validate(cfg_);
}

void Model::init(ad::ParamStore& store, std::uint64_t seed) const {
  Rng rng(mix_seed(seed, 1));
  if (has_localization()) lm_.init(store, rng);
  gm_.init(store, rng);
}

void Model::check(const ad::ParamStore& store) const {
  if (has_localization()) lm_.check(store);
  gm_.check(store);
}

wpm::WindowProposal trimmed_window(std::size_t t, std::size_t width, std::size_t length) {
  if (length == 0 || width == 0) throw std::invalid_argument("trimmed_window: empty window or signal");
  if (t >= length) throw std::out_of_range("trimmed_window: timestamp outside the sequence");
  wpm::WindowProposal w;
  w.peak = t;
  const std::size_t half = width / 2;
  w.left = t > half ? t - half : 0;
  w.right = std::min(length, t + (width - half));
  w.right = std::max(w.right, t + 1);
  return w;
}

std::vector<wpm::WindowProposal> windows_for(const TrainConfig& cfg, std::span<const double> probs) {
  const auto options = proposal_options(cfg);
  switch (cfg.mode) {
    case Mode::stc: return wpm::propose_windows(probs, options);
    case Mode::fixed_window: return wpm::fixed_windows(probs, cfg.window, options);
    case Mode::no_wpm: {
      wpm::WindowProposal w;
      w.peak = nets::argmax(probs);
      w.peak_height = probs[w.peak];
      w.left = 0;
      w.right = probs.size();
      return {w};
    }
    case Mode::full:
    case Mode::trimmed: break;
  }
  throw std::logic_error("windows_for: mode has no localization");
}

namespace {

Var pooled_logits(Tape& tape, const Model& model, const Var& window_features, Rng* dropout) {
  const Var frames = model.gm().frame_logits(tape, window_features, dropout);
  return nets::topk_pool(frames, model.config().topk);
}

wpm::WindowProposal whole_video(std::size_t length) {
  wpm::WindowProposal w;
  w.left = 0;
  w.right = length;
  return w;
}

}  // namespace

ForwardResult forward_video(Tape& tape, const Model& model, const synth::SynthVideo& video, Stage stage, Rng* dropout) {
  const auto& cfg = model.config();
  const std::size_t length = video.length();
  const Var x = tape.constant(video.features);
  const auto grade = static_cast<std::size_t>(video.grade);
  ForwardResult out;

  if (!model.has_localization()) {
    const auto w = cfg.mode == Mode::trimmed ? trimmed_window(video.timestamp, cfg.window, length) : whole_video(length);
    const Var xi = w.left == 0 && w.right == length ? x : ad::slice_rows(x, w.left, w.right);
    out.grading_loss = objectives::cross_entropy(pooled_logits(tape, model, xi, dropout), grade - 1);
    out.loss = out.grading_loss;
    out.windows = {w};
    return out;
  }

  const auto lm = model.lm().forward(tape, x, dropout);
  if (stage != Stage::grading) {
    objectives::LocalizationLossOptions opts{cfg.alpha, cfg.use_bce, cfg.use_cos};
    out.localization_loss = objectives::localization_loss(lm.scores, lm.probabilities, video.timestamp, cfg.delta, opts);
  }
  if (stage == Stage::localization) {
    out.loss = out.localization_loss;
    return out;
  }

  // Proposals come from the current probabilities as plain numbers; the
  // gradient reaches the localization module through the reweighting only.
  const auto probs = lm.probabilities.value().data();
  out.windows = windows_for(cfg, probs);
  std::vector<Var> logits;
  std::vector<std::size_t> peaks;
  for (const auto& w : out.windows) {
    const bool whole = w.left == 0 && w.right == length;
    const Var xi = whole ? x : ad::slice_rows(x, w.left, w.right);
    const Var pi = whole ? lm.probabilities : ad::slice_rows(lm.probabilities, w.left, w.right);
    logits.push_back(pooled_logits(tape, model, nets::reweight(xi, pi), dropout));
    peaks.push_back(w.peak);
  }
  out.grading_loss = objectives::grading_loss(logits, peaks, video.timestamp, video.grade, cfg.use_bg);
  out.loss = stage == Stage::joint ? objectives::total_loss(out.grading_loss, out.localization_loss, cfg.beta)
                                   : out.grading_loss;
  return out;
}

Prediction predict(const ad::ParamStore& store, const Model& model, const synth::SynthVideo& video) {
  const auto& cfg = model.config();
  const std::size_t length = video.length();
  Tape tape(&store);
  const Var x = tape.constant(video.features);
  Prediction pred;

  if (!model.has_localization()) {
    const auto w = cfg.mode == Mode::trimmed ? trimmed_window(video.timestamp, cfg.window, length) : whole_video(length);
    const Var xi = w.left == 0 && w.right == length ? x : ad::slice_rows(x, w.left, w.right);
    const Var pooled = pooled_logits(tape, model, xi, nullptr);
    const auto v = pooled.value().data();
    pred.windows = {w};
    pred.proposals.push_back({0.0, std::vector<double>(v.begin(), v.end())});
    return pred;
  }

  const auto lm = model.lm().forward(tape, x, nullptr);
  pred.has_localization = true;
  pred.scores = lm.scores.value();
  pred.probabilities = lm.probabilities.value();
  pred.predicted_timestamp = nets::argmax(pred.scores.data());
  pred.windows = windows_for(cfg, pred.probabilities.data());
  for (const auto& w : pred.windows) {
    const bool whole = w.left == 0 && w.right == length;
    const Var xi = whole ? x : ad::slice_rows(x, w.left, w.right);
    const Var pi = whole ? lm.probabilities : ad::slice_rows(lm.probabilities, w.left, w.right);
    const Var pooled = pooled_logits(tape, model, nets::reweight(xi, pi), nullptr);
    const auto v = pooled.value().data();
    pred.proposals.push_back({pred.scores[w.peak], std::vector<double>(v.begin(), v.end())});
  }
  return pred;
}

int decide(const Prediction& prediction, const Model& model, nets::ConsensusStrategy strategy) {
  if (prediction.proposals.empty()) throw std::invalid_argument("decide: prediction without proposals");
  if (!model.has_localization()) {
    const auto& logits = prediction.proposals.front().logits;
    return static_cast<int>(nets::argmax(logits)) + 1;
  }
  return nets::consensus(prediction.proposals, strategy);
}

}  // namespace stc::train
