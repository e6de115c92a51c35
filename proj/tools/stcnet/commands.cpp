#include "stcnet/commands.hpp"

#include <map>
#include <stdexcept>

#include "stc/autodiff/checkpoint.hpp"
#include "stc/io/binary.hpp"
#include "stc/train/plotdata.hpp"
#include "stc/train/trainer.hpp"
#include "stcnet/ablation.hpp"

namespace stcnet {

namespace fs = std::filesystem;
using stc::io::write_file_atomic;

namespace {

void say(const CommandContext& ctx, const std::string& msg) {
  if (ctx.log) ctx.log(msg);
}

void prepare_output(const CommandContext& ctx) {
  fs::create_directories(ctx.out);
  write_file_atomic(ctx.out / "config.cfg", echo(ctx.config));
}

fs::path subdir(const CommandContext& ctx, const char* name) {
  const auto dir = ctx.out / name;
  fs::create_directories(dir);
  return dir;
}

stc::synth::Dataset load_or_generate(const CommandContext& ctx) {
  if (ctx.dataset) {
    say(ctx, "loading dataset " + ctx.dataset->string());
    return stc::synth::load_dataset(*ctx.dataset);
  }
  say(ctx, "generating dataset (seed " + std::to_string(ctx.config.synth.seed) + ")");
  return stc::synth::generate(ctx.config.synth);
}

stc::ad::ParamStore load_params(const CommandContext& ctx, const stc::synth::Dataset& ds) {
  if (!ctx.checkpoint) throw std::invalid_argument("--checkpoint is required");
  auto ckpt = stc::ad::load_checkpoint(*ctx.checkpoint);
  const auto expected = stc::train::architecture_hash(ctx.config.train, ds.dim(), ds.classes());
  if (ckpt.header.config_hash != expected) {
    throw std::invalid_argument("checkpoint " + ctx.checkpoint->string() +
                                " was written for a different architecture (config hash mismatch); pass the --config "
                                "it was trained with");
  }
  stc::train::Model model(ctx.config.train, ds.dim(), ds.classes());
  model.check(ckpt.params);
  return std::move(ckpt.params);
}

void write_reports(const CommandContext& ctx, const stc::eval::EvalReport& report, const std::string& stem) {
  const auto dir = subdir(ctx, "reports");
  write_file_atomic(dir / (stem + ".txt"), stc::eval::format_table(report));
  write_file_atomic(dir / (stem + ".json"), stc::eval::to_json(report));
  write_file_atomic(dir / (stem + "_confusion.csv"), stc::eval::confusion_csv(report));
  write_file_atomic(dir / (stem + "_videos.csv"), stc::eval::records_csv(report));
  for (const auto& w : report.classification.warnings) say(ctx, "warning: " + w);
}

stc::eval::EvalReport evaluate(const CommandContext& ctx, const stc::ad::ParamStore& params,
                               const stc::synth::Dataset& ds) {
  stc::train::Model model(ctx.config.train, ds.dim(), ds.classes());
  const auto videos = ds.split(false);
  if (videos.empty()) throw std::invalid_argument("dataset has no held-out videos (synth.train_fraction = 1)");
  const auto preds = stc::train::predict_all(params, model, videos);
  return stc::train::report_for(preds, videos, model, ctx.config.train.consensus, ctx.config.averaging);
}

}  // namespace

void cmd_generate(const CommandContext& ctx) {
  prepare_output(ctx);
  const auto ds = stc::synth::generate(ctx.config.synth);
  stc::synth::save_dataset(ctx.out / "dataset.stcd", ds);
  say(ctx, "wrote " + std::to_string(ds.videos.size()) + " videos to " + (ctx.out / "dataset.stcd").string());
}

void cmd_train(const CommandContext& ctx) {
  prepare_output(ctx);
  const auto ds = load_or_generate(ctx);
  if (!ctx.dataset) stc::synth::save_dataset(ctx.out / "dataset.stcd", ds);

  const auto& cfg = ctx.config.train;
  std::vector<stc::train::EpochLog> log;
  const auto logs = subdir(ctx, "logs");
  auto result = stc::train::train(ds, cfg, [&](const stc::train::EpochLog& e) {
    log.push_back(e);
    write_file_atomic(logs / "train.csv", stc::train::log_csv(log));
    char buf[160];
    std::snprintf(buf, sizeof buf, "epoch %zu [%s] loss %.4f (L_L %.4f, L_G %.4f) val acc %.4f", e.epoch + 1,
                  std::string(stc::train::to_string(e.stage)).c_str(), e.loss, e.localization_loss, e.grading_loss,
                  e.val_accuracy);
    say(ctx, buf);
  });
  write_file_atomic(logs / "train.csv", stc::train::log_csv(result.log));
  const auto ckpt = subdir(ctx, "checkpoints") / "model.stck";
  stc::ad::save_checkpoint(ckpt, result.params, {result.config_hash, result.epochs_completed});
  say(ctx, "wrote " + ckpt.string());
  const auto report = evaluate(ctx, result.params, ds);
  write_reports(ctx, report, "test");
  say(ctx, stc::eval::format_table(report));
}

void cmd_eval(const CommandContext& ctx) {
  prepare_output(ctx);
  const auto ds = load_or_generate(ctx);
  const auto params = load_params(ctx, ds);
  const auto report = evaluate(ctx, params, ds);
  write_reports(ctx, report, "eval");
  say(ctx, stc::eval::format_table(report));
}

void cmd_ablate(const CommandContext& ctx) {
  prepare_output(ctx);
  std::map<std::uint64_t, stc::synth::Dataset> cache;
  std::optional<stc::synth::Dataset> fixed;
  if (ctx.dataset) fixed = stc::synth::load_dataset(*ctx.dataset);
  const DatasetSource source = [&](std::uint64_t seed) -> const stc::synth::Dataset& {
    if (fixed) return *fixed;
    auto it = cache.find(seed);
    if (it == cache.end()) {
      auto sc = ctx.config.synth;
      sc.seed = seed;
      it = cache.emplace(seed, stc::synth::generate(sc)).first;
    }
    return it->second;
  };
  const auto rows = run_ablation(ctx.config, ctx.ablation_key, source, ctx.log);
  const auto dir = subdir(ctx, "reports");
  write_file_atomic(dir / ("ablation_" + ctx.ablation_key + ".csv"), ablation_csv(rows));
  const auto table = ablation_table(rows);
  write_file_atomic(dir / ("ablation_" + ctx.ablation_key + ".txt"), table);
  say(ctx, table);
}

void cmd_plotdata(const CommandContext& ctx) {
  prepare_output(ctx);
  const auto ds = load_or_generate(ctx);
  const auto params = load_params(ctx, ds);
  const auto& cfg = ctx.config.train;
  stc::train::Model model(cfg, ds.dim(), ds.classes());
  const auto videos = ds.split(false);
  if (videos.empty()) throw std::invalid_argument("dataset has no held-out videos");
  const auto preds = stc::train::predict_all(params, model, videos);
  const auto report = stc::train::report_for(preds, videos, model, cfg.consensus, ctx.config.averaging);

  const auto dir = subdir(ctx, "plotdata");
  write_file_atomic(dir / "confusion.csv", stc::eval::confusion_csv(report));
  if (!model.has_localization()) {
    say(ctx, "mode " + std::string(stc::train::to_string(cfg.mode)) + " has no localization; only confusion.csv written");
    return;
  }
  const std::size_t n = std::min(ctx.config.plot_videos, videos.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = std::to_string(videos[i]->id);
    write_file_atomic(dir / ("trace_" + id + ".csv"), stc::train::trace_csv(preds[i], *videos[i], cfg));
    write_file_atomic(dir / ("proposals_" + id + ".csv"), stc::train::proposals_csv(preds[i], *videos[i], cfg));
  }
  say(ctx, "wrote plot data for " + std::to_string(n) + " videos to " + dir.string());
}

}  // namespace stcnet
