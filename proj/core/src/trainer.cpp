#include "stc/train/trainer.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "stc/train/adam.hpp"
#include "stc/util/kv.hpp"

namespace stc::train {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void set_stage_flags(ad::ParamStore& params, const Model& model, Stage stage) {
  if (!model.has_localization()) return;
  params.set_trainable("lm.", stage != Stage::grading);
  params.set_trainable("gm.", stage != Stage::localization);
}

}  // namespace

ad::ParamStore initial_params(const synth::Dataset& dataset, const TrainConfig& cfg) {
  Model model(cfg, dataset.dim(), dataset.classes());
  ad::ParamStore params;
  model.init(params, cfg.seed);
  return params;
}

TrainResult train(const synth::Dataset& dataset, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  validate(cfg);
  const auto train_videos = dataset.split(true);
  const auto val_videos = dataset.split(false);
  if (train_videos.empty()) throw std::invalid_argument("train: dataset has no training videos");

  Model model(cfg, dataset.dim(), dataset.classes());
  TrainResult result;
  model.init(result.params, cfg.seed);
  result.config_hash = architecture_hash(cfg, dataset.dim(), dataset.classes());

  Adam adam(AdamOptions{cfg.learning_rate});
  Rng shuffle_rng(mix_seed(cfg.seed, 2));
  Rng dropout_rng(mix_seed(cfg.seed, 3));
  std::vector<std::size_t> order(train_videos.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::optional<ad::ParamStore> best;
  double best_accuracy = -1.0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Stage stage = stage_for_epoch(cfg, epoch);
    set_stage_flags(result.params, model, stage);
    for (std::size_t i = order.size(); i-- > 1;) {
      std::swap(order[i], order[static_cast<std::size_t>(uniform_int(shuffle_rng, 0, static_cast<std::int64_t>(i)))]);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.stage = stage;
    for (const std::size_t idx : order) {
      result.params.zero_grad();
      ad::Tape tape(&result.params);
      const auto fwd = forward_video(tape, model, *train_videos[idx], stage, &dropout_rng);
      entry.loss += fwd.loss.value().item();
      if (fwd.localization_loss.valid()) entry.localization_loss += fwd.localization_loss.value().item();
      if (fwd.grading_loss.valid()) entry.grading_loss += fwd.grading_loss.value().item();
      tape.backward(fwd.loss);
      adam.step(result.params);
    }
    const auto n = static_cast<double>(order.size());
    entry.loss /= n;
    entry.localization_loss /= n;
    entry.grading_loss /= n;
    if (!std::isfinite(entry.loss)) {
      throw std::runtime_error("train: non-finite loss in epoch " + std::to_string(epoch));
    }

    entry.val_accuracy = entry.val_mae = entry.val_iou = kNaN;
    if (cfg.validate_each_epoch && !val_videos.empty()) {
      const auto preds = predict_all(result.params, model, val_videos);
      const auto report = report_for(preds, val_videos, model, cfg.consensus);
      entry.val_accuracy = report.classification.accuracy;
      entry.val_mae = report.mae;
      entry.val_iou = report.mean_iou;
      if (cfg.select_best && entry.val_accuracy > best_accuracy) {
        best_accuracy = entry.val_accuracy;
        best = result.params;
        result.epochs_completed = epoch + 1;
      }
    }
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }

  if (cfg.select_best && best) {
    result.params = std::move(*best);
  } else {
    result.epochs_completed = cfg.epochs;
  }
  result.params.zero_grad();
  for (auto& [name, p] : result.params) p.trainable = true;
  return result;
}

std::vector<Prediction> predict_all(const ad::ParamStore& params, const Model& model,
                                    std::span<const synth::SynthVideo* const> videos) {
  model.check(params);
  std::vector<Prediction> out;
  out.reserve(videos.size());
  for (const auto* v : videos) {
    if (v->features.dim(1) != model.input_dim()) {
      throw std::invalid_argument("predict: video " + std::to_string(v->id) + " has feature dimension " +
                                  std::to_string(v->features.dim(1)) + ", model expects " +
                                  std::to_string(model.input_dim()));
    }
    out.push_back(predict(params, model, *v));
  }
  return out;
}

eval::EvalReport report_for(std::span<const Prediction> predictions, std::span<const synth::SynthVideo* const> videos,
                            const Model& model, nets::ConsensusStrategy strategy, eval::Averaging averaging) {
  if (predictions.size() != videos.size()) throw std::invalid_argument("report_for: length mismatch");
  std::vector<eval::VideoRecord> records;
  records.reserve(videos.size());
  for (std::size_t i = 0; i < videos.size(); ++i) {
    const auto& p = predictions[i];
    const auto& v = *videos[i];
    eval::VideoRecord r;
    r.id = v.id;
    r.label = v.grade;
    r.predicted = decide(p, model, strategy);
    r.timestamp = v.timestamp;
    r.has_localization = p.has_localization;
    r.predicted_timestamp = p.predicted_timestamp;
    r.proposals = p.windows.size();
    std::vector<eval::Interval> windows;
    for (const auto& w : p.windows) windows.push_back({w.left, w.right});
    r.best_iou = eval::best_iou(windows, {v.segment_begin, v.segment_end});
    records.push_back(r);
  }
  return eval::make_report(std::move(records), model.classes(), averaging);
}

eval::EvalReport evaluate(const ad::ParamStore& params, const synth::Dataset& dataset, const TrainConfig& cfg,
                          bool train_split) {
  Model model(cfg, dataset.dim(), dataset.classes());
  const auto videos = dataset.split(train_split);
  if (videos.empty()) throw std::invalid_argument("evaluate: split is empty");
  const auto preds = predict_all(params, model, videos);
  return report_for(preds, videos, model, cfg.consensus);
}

eval::EvalReport run_baseline(const synth::Dataset& dataset, Mode mode, TrainConfig cfg) {
  cfg.mode = mode;
  if (!uses_localization(mode)) cfg.scheme = Scheme::end_to_end;
  const auto result = train(dataset, cfg);
  return evaluate(result.params, dataset, cfg);
}

std::string log_csv(std::span<const EpochLog> log) {
  auto num = [](double v) { return std::isnan(v) ? std::string() : kv::format_double(v); };
  std::ostringstream os;
  os << "epoch,stage,loss,loss_l,loss_g,val_accuracy,val_mae,val_iou\n";
  for (const auto& e : log) {
    os << e.epoch << ',' << to_string(e.stage) << ',' << num(e.loss) << ',' << num(e.localization_loss) << ','
       << num(e.grading_loss) << ',' << num(e.val_accuracy) << ',' << num(e.val_mae) << ',' << num(e.val_iou) << '\n';
  }
  return os.str();
}

}  // namespace stc::train
