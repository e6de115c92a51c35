#include <cstdio>
#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "stcnet/ablation.hpp"
#include "stcnet/commands.hpp"

namespace {

struct Common {
  std::string config;
  std::string out = "run";
  std::int64_t seed = -1;
  std::string dataset;
  std::string checkpoint;
  std::string key;
  bool quiet = false;
};

CLI::App* add_verb(CLI::App& app, const char* name, const char* help, Common& c) {
  auto* sub = app.add_subcommand(name, help);
  sub->allow_extras();
  sub->add_option("--config", c.config, "Key-value configuration file");
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "Seed for both the generator and training");
  sub->add_flag("-q,--quiet", c.quiet, "Suppress progress output");
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stcnet: single-timestamp localization and grading on feature sequences"};
  app.require_subcommand(1);
  app.footer("Any configuration key can be overridden as --key=value, e.g. --epochs=20 --synth.videos=50.");

  Common c;
  auto* generate = add_verb(app, "generate", "Generate a synthetic dataset", c);
  auto* train = add_verb(app, "train", "Train a model and evaluate it on the held-out split", c);
  auto* eval = add_verb(app, "eval", "Evaluate a checkpoint", c);
  auto* ablate = add_verb(app, "ablate", "Run an ablation sweep", c);
  auto* plotdata = add_verb(app, "plotdata", "Emit plot-ready CSV files for a checkpoint", c);
  for (auto* sub : {train, eval, ablate, plotdata}) {
    sub->add_option("--dataset", c.dataset, "Dataset file (generated from the config when omitted)");
  }
  for (auto* sub : {eval, plotdata}) sub->add_option("--checkpoint", c.checkpoint, "Checkpoint file")->required();
  ablate->add_option("--key", c.key, "Sweep: losses, schemes, consensus, wpm, baselines or all")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto* verb = app.get_subcommands().front();
    stcnet::CommandContext ctx;
    const auto overrides = stcnet::parse_overrides(verb->remaining());
    std::optional<std::filesystem::path> file;
    if (!c.config.empty()) file = c.config;
    std::optional<std::uint64_t> seed;
    if (c.seed >= 0) seed = static_cast<std::uint64_t>(c.seed);
    // Overrides apply after --seed, so an explicit --synth.seed=... still wins.
    ctx.config = stcnet::resolve(file, seed, overrides);
    ctx.out = c.out;
    if (!c.dataset.empty()) ctx.dataset = c.dataset;
    if (!c.checkpoint.empty()) ctx.checkpoint = c.checkpoint;
    ctx.ablation_key = c.key;
    if (!c.quiet) ctx.log = [](const std::string& s) { std::cerr << s << '\n'; };

    if (verb == generate) stcnet::cmd_generate(ctx);
    else if (verb == train) stcnet::cmd_train(ctx);
    else if (verb == eval) stcnet::cmd_eval(ctx);
    else if (verb == ablate) {
      const auto& keys = stcnet::ablation_keys();
      if (std::find(keys.begin(), keys.end(), c.key) == keys.end()) {
        std::string valid;
        for (const auto& k : keys) valid += (valid.empty() ? "" : ", ") + k;
        throw std::invalid_argument("unknown ablation key '" + c.key + "'; valid keys: " + valid);
      }
      stcnet::cmd_ablate(ctx);
    } else if (verb == plotdata) stcnet::cmd_plotdata(ctx);
  } catch (const std::exception& e) {
    std::cerr << "stcnet: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
