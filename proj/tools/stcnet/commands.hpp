#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "stcnet/run_config.hpp"

namespace stcnet {

struct CommandContext {
  RunConfig config;
  std::filesystem::path out;
  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> checkpoint;
  std::string ablation_key;
  /// Progress lines; nothing is printed when empty.
  std::function<void(const std::string&)> log;
};

// Each command writes the resolved configuration to <out>/config.cfg before
// doing anything else and returns normally on success; failures throw.
void cmd_generate(const CommandContext& ctx);
void cmd_train(const CommandContext& ctx);
void cmd_eval(const CommandContext& ctx);
void cmd_ablate(const CommandContext& ctx);
void cmd_plotdata(const CommandContext& ctx);

}  // namespace stcnet
