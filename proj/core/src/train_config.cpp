#include "stc/train/config.hpp"

#include <sstream>
#include <stdexcept>

#include "stc/io/binary.hpp"
#include "stc/util/kv.hpp"

namespace stc::train {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::two_stage: return "two_stage";
    case Scheme::end_to_end: return "end_to_end";
    case Scheme::separate: return "separate";
  }
  return "?";
}

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::stc: return "stc";
    case Mode::full: return "full";
    case Mode::trimmed: return "trimmed";
    case Mode::fixed_window: return "fixed_window";
    case Mode::no_wpm: return "no_wpm";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view s) {
  for (auto v : {Scheme::two_stage, Scheme::end_to_end, Scheme::separate}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<Mode> parse_mode(std::string_view s) {
  for (auto v : {Mode::stc, Mode::full, Mode::trimmed, Mode::fixed_window, Mode::no_wpm}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

bool uses_localization(Mode m) { return m != Mode::full && m != Mode::trimmed; }

void validate(const TrainConfig& cfg) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("TrainConfig: " + msg); };
  if (cfg.e_frozen > cfg.epochs) fail("e_frozen must not exceed epochs");
  if (!(cfg.learning_rate >= 0.0)) fail("learning rate must be non-negative");
  if (!(cfg.alpha >= 0.0) || !(cfg.beta >= 0.0)) fail("alpha and beta must be non-negative");
  if (!(cfg.delta >= 1.0)) fail("delta must be at least 1 frame");
  if (!(cfg.n_std > 0.0)) fail("n_std must be positive");
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) fail("threshold must lie in (0, 1)");
  if (cfg.topk == 0) fail("topk must be at least 1");
  if ((cfg.mode == Mode::trimmed || cfg.mode == Mode::fixed_window) && cfg.window == 0) {
    fail(std::string("mode ") + std::string(to_string(cfg.mode)) + " needs window > 0");
  }
  if (!uses_localization(cfg.mode) && cfg.scheme != Scheme::end_to_end) {
    fail(std::string("mode ") + std::string(to_string(cfg.mode)) + " has no localization module, so scheme " +
         std::string(to_string(cfg.scheme)) + " is meaningless; use scheme end_to_end");
  }
  if (uses_localization(cfg.mode) && !cfg.use_bce && !cfg.use_cos && cfg.scheme != Scheme::end_to_end) {
    fail("localization warm-up needs at least one of use_bce / use_cos");
  }
  if (cfg.lm_layers == 0 || cfg.lm_width == 0 || cfg.gm_layers == 0 || cfg.gm_width == 0) {
    fail("network layers and widths must be positive");
  }
  if (!(cfg.lm_dropout >= 0.0 && cfg.lm_dropout < 1.0) || !(cfg.gm_dropout >= 0.0 && cfg.gm_dropout < 1.0)) {
    fail("dropout must lie in [0, 1)");
  }
}

nets::LMConfig lm_config(const TrainConfig& cfg, std::size_t input_dim) {
  nets::LMConfig lm;
  lm.input_dim = input_dim;
  lm.layers = cfg.lm_layers;
  lm.width = cfg.lm_width;
  lm.dropout = cfg.lm_dropout;
  return lm;
}

nets::GMConfig gm_config(const TrainConfig& cfg, std::size_t input_dim, std::size_t classes) {
  nets::GMConfig gm;
  gm.input_dim = input_dim;
  gm.layers = cfg.gm_layers;
  gm.width = cfg.gm_width;
  gm.dropout = cfg.gm_dropout;
  gm.classes = classes;
  gm.topk = cfg.topk;
  gm.background = uses_localization(cfg.mode);
  return gm;
}

wpm::ProposalOptions proposal_options(const TrainConfig& cfg) {
  wpm::ProposalOptions o;
  o.n_std = cfg.n_std;
  o.threshold = cfg.threshold;
  o.max_proposals = cfg.max_proposals;
  return o;
}

bool apply(TrainConfig& cfg, std::string_view key, std::string_view value) {
  auto size = [&] { return static_cast<std::size_t>(kv::to_uint(key, value)); };
  auto real = [&] { return kv::to_double(key, value); };
  auto flag = [&] { return kv::to_bool(key, value); };
  if (key == "epochs") cfg.epochs = size();
  else if (key == "e_frozen") cfg.e_frozen = size();
  else if (key == "learning_rate") cfg.learning_rate = real();
  else if (key == "alpha") cfg.alpha = real();
  else if (key == "beta") cfg.beta = real();
  else if (key == "delta") cfg.delta = real();
  else if (key == "n_std") cfg.n_std = real();
  else if (key == "threshold") cfg.threshold = real();
  else if (key == "topk") cfg.topk = size();
  else if (key == "max_proposals") cfg.max_proposals = size();
  else if (key == "scheme") {
    auto s = parse_scheme(value);
    if (!s) throw std::invalid_argument("scheme: expected two_stage, end_to_end or separate, got '" + std::string(value) + "'");
    cfg.scheme = *s;
  } else if (key == "mode") {
    auto m = parse_mode(value);
    if (!m) throw std::invalid_argument("mode: expected stc, full, trimmed, fixed_window or no_wpm, got '" + std::string(value) + "'");
    cfg.mode = *m;
  } else if (key == "window") cfg.window = size();
  else if (key == "consensus") {
    auto c = nets::parse_consensus(value);
    if (!c) {
      throw std::invalid_argument("consensus: expected highest_peak, average, majority_vote or highest_confidence, got '" +
                                  std::string(value) + "'");
    }
    cfg.consensus = *c;
  } else if (key == "use_bce") cfg.use_bce = flag();
  else if (key == "use_cos") cfg.use_cos = flag();
  else if (key == "use_bg") cfg.use_bg = flag();
  else if (key == "select_best") cfg.select_best = flag();
  else if (key == "validate_each_epoch") cfg.validate_each_epoch = flag();
  else if (key == "seed") cfg.seed = kv::to_uint(key, value);
  else if (key == "lm_layers") cfg.lm_layers = size();
  else if (key == "lm_width") cfg.lm_width = size();
  else if (key == "lm_dropout") cfg.lm_dropout = real();
  else if (key == "gm_layers") cfg.gm_layers = size();
  else if (key == "gm_width") cfg.gm_width = size();
  else if (key == "gm_dropout") cfg.gm_dropout = real();
  else return false;
  return true;
}

std::string config_echo(const TrainConfig& cfg) {
  auto b = [](bool v) { return v ? "true" : "false"; };
  std::ostringstream os;
  os << "epochs = " << cfg.epochs << '\n'
     << "e_frozen = " << cfg.e_frozen << '\n'
     << "learning_rate = " << kv::format_double(cfg.learning_rate) << '\n'
     << "alpha = " << kv::format_double(cfg.alpha) << '\n'
     << "beta = " << kv::format_double(cfg.beta) << '\n'
     << "delta = " << kv::format_double(cfg.delta) << '\n'
     << "n_std = " << kv::format_double(cfg.n_std) << '\n'
     << "threshold = " << kv::format_double(cfg.threshold) << '\n'
     << "topk = " << cfg.topk << '\n'
     << "max_proposals = " << cfg.max_proposals << '\n'
     << "scheme = " << to_string(cfg.scheme) << '\n'
     << "mode = " << to_string(cfg.mode) << '\n'
     << "window = " << cfg.window << '\n'
     << "consensus = " << nets::to_string(cfg.consensus) << '\n'
     << "use_bce = " << b(cfg.use_bce) << '\n'
     << "use_cos = " << b(cfg.use_cos) << '\n'
     << "use_bg = " << b(cfg.use_bg) << '\n'
     << "select_best = " << b(cfg.select_best) << '\n'
     << "validate_each_epoch = " << b(cfg.validate_each_epoch) << '\n'
     << "seed = " << cfg.seed << '\n'
     << "lm_layers = " << cfg.lm_layers << '\n'
     << "lm_width = " << cfg.lm_width << '\n'
     << "lm_dropout = " << kv::format_double(cfg.lm_dropout) << '\n'
     << "gm_layers = " << cfg.gm_layers << '\n'
     << "gm_width = " << cfg.gm_width << '\n'
     << "gm_dropout = " << kv::format_double(cfg.gm_dropout) << '\n';
  return os.str();
}

std::uint64_t architecture_hash(const TrainConfig& cfg, std::size_t input_dim, std::size_t classes) {
  std::ostringstream os;
  os << "input_dim=" << input_dim << ";classes=" << classes
     << ";localization=" << uses_localization(cfg.mode) << ";lm=" << cfg.lm_layers << 'x' << cfg.lm_width
     << ";gm=" << cfg.gm_layers << 'x' << cfg.gm_width;
  return io::fnv1a64(os.str());
}

}  // namespace stc::train
