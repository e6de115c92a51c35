#include "stcnet/run_config.hpp"

#include <sstream>
#include <stdexcept>

#include "stc/io/binary.hpp"
#include "stc/util/kv.hpp"

namespace stcnet {

namespace kv = stc::kv;

void apply(RunConfig& cfg, std::string_view key, std::string_view value) {
  constexpr std::string_view synth_prefix = "synth.";
  if (key.substr(0, synth_prefix.size()) == synth_prefix) {
    if (stc::synth::apply(cfg.synth, key.substr(synth_prefix.size()), value)) return;
  } else if (stc::train::apply(cfg.train, key, value)) {
    return;
  } else if (key == "averaging") {
    if (value == "macro") cfg.averaging = stc::eval::Averaging::macro;
    else if (value == "micro") cfg.averaging = stc::eval::Averaging::micro;
    else throw std::invalid_argument("averaging: expected macro or micro, got '" + std::string(value) + "'");
    return;
  } else if (key == "seeds") {
    cfg.seeds.clear();
    for (auto s : kv::to_int_list(key, value)) {
      if (s < 0) throw std::invalid_argument("seeds: negative seed " + std::to_string(s));
      cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    return;
  } else if (key == "plot_videos") {
    cfg.plot_videos = static_cast<std::size_t>(kv::to_uint(key, value));
    return;
  }
  throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

void set_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.synth.seed = seed;
  cfg.train.seed = seed;
}

RunConfig resolve(const std::optional<std::filesystem::path>& file, std::optional<std::uint64_t> seed,
                  const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg;
  if (file) {
    const auto bytes = stc::io::read_file(*file);
    const std::string text(bytes.begin(), bytes.end());
    for (const auto& e : kv::parse(text)) {
      try {
        apply(cfg, e.key, e.value);
      } catch (const std::invalid_argument& ex) {
        throw std::invalid_argument(file->string() + ":" + std::to_string(e.line) + ": " + ex.what());
      }
    }
  }
  if (seed) set_seed(cfg, *seed);
  for (const auto& [k, v] : overrides) apply(cfg, k, v);
  stc::synth::validate(cfg.synth);
  stc::train::validate(cfg.train);
  if (cfg.seeds.empty()) throw std::invalid_argument("seeds: at least one seed is required");
  return cfg;
}

std::string echo(const RunConfig& cfg) {
  std::ostringstream os;
  os << "# generator\n";
  std::istringstream synth(stc::synth::config_echo(cfg.synth));
  for (std::string line; std::getline(synth, line);) os << "synth." << line << '\n';
  os << "\n# training\n" << stc::train::config_echo(cfg.train);
  os << "\n# evaluation\n"
     << "averaging = " << (cfg.averaging == stc::eval::Averaging::macro ? "macro" : "micro") << '\n'
     << "seeds = ";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) os << (i ? "," : "") << cfg.seeds[i];
  os << "\nplot_videos = " << cfg.plot_videos << '\n';
  return os.str();
}

std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& args) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& a : args) {
    const auto eq = a.find('=');
    if (a.rfind("--", 0) != 0 || eq == std::string::npos || eq == 2) {
      throw std::invalid_argument("unexpected argument '" + a + "' (overrides take the form --key=value)");
    }
    out.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
  }
  return out;
}

}  // namespace stcnet
