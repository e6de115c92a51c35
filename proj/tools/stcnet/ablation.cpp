#include "stcnet/ablation.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "stc/train/trainer.hpp"

namespace stcnet {

using stc::train::Mode;
using stc::train::Scheme;
using stc::train::TrainConfig;

const std::vector<std::string>& ablation_keys() {
  static const std::vector<std::string> keys{"losses", "schemes", "consensus", "wpm", "baselines", "all"};
  return keys;
}

namespace {

struct Cell {
  std::string group;
  std::string setting;
  TrainConfig cfg;
};

std::string check(bool on) { return on ? "+" : "-"; }

std::vector<Cell> loss_cells(const TrainConfig& base) {
  std::vector<Cell> cells;
  const bool combos[4][3] = {{true, false, true}, {false, true, true}, {true, true, false}, {true, true, true}};
  for (const auto& c : combos) {
    TrainConfig t = base;
    t.mode = Mode::stc;
    t.use_bce = c[0];
    t.use_cos = c[1];
    t.use_bg = c[2];
    cells.push_back({"losses", "bce" + check(c[0]) + " cos" + check(c[1]) + " bg" + check(c[2]), t});
  }
  return cells;
}

std::vector<Cell> scheme_cells(const TrainConfig& base) {
  std::vector<Cell> cells;
  for (auto s : {Scheme::end_to_end, Scheme::separate, Scheme::two_stage}) {
    TrainConfig t = base;
    t.mode = Mode::stc;
    t.scheme = s;
    cells.push_back({"schemes", std::string(stc::train::to_string(s)), t});
  }
  return cells;
}

std::vector<Cell> consensus_cells(const TrainConfig& base) {
  std::vector<Cell> cells;
  for (auto s : stc::nets::all_consensus_strategies()) {
    TrainConfig t = base;
    t.mode = Mode::stc;
    t.consensus = s;
    cells.push_back({"consensus", std::string(stc::nets::to_string(s)), t});
  }
  return cells;
}

std::vector<Cell> wpm_cells(const TrainConfig& base) {
  std::vector<Cell> cells;
  TrainConfig none = base;
  none.mode = Mode::no_wpm;
  cells.push_back({"wpm", "entire sequence", none});
  for (std::size_t w : {20, 60, 120, 180, 240, 300}) {
    TrainConfig t = base;
    t.mode = Mode::fixed_window;
    t.window = w;
    cells.push_back({"wpm", "fixed window " + std::to_string(w), t});
  }
  TrainConfig stc = base;
  stc.mode = Mode::stc;
  cells.push_back({"wpm", "gaussian fit", stc});
  return cells;
}

std::vector<Cell> baseline_cells(const TrainConfig& base) {
  std::vector<Cell> cells;
  TrainConfig full = base;
  full.mode = Mode::full;
  full.scheme = Scheme::end_to_end;
  cells.push_back({"baselines", "full", full});
  for (std::size_t w : {20, 60, 120, 180, 240}) {
    TrainConfig t = base;
    t.mode = Mode::trimmed;
    t.scheme = Scheme::end_to_end;
    t.window = w;
    cells.push_back({"baselines", "trimmed " + std::to_string(w), t});
  }
  TrainConfig stc = base;
  stc.mode = Mode::stc;
  cells.push_back({"baselines", "stc", stc});
  return cells;
}

std::vector<Cell> cells_for(std::string_view key, const TrainConfig& base) {
  if (key == "losses") return loss_cells(base);
  if (key == "schemes") return scheme_cells(base);
  if (key == "consensus") return consensus_cells(base);
  if (key == "wpm") return wpm_cells(base);
  if (key == "baselines") return baseline_cells(base);
  if (key == "all") {
    std::vector<Cell> all;
    for (auto k : {"baselines", "wpm", "losses", "schemes", "consensus"}) {
      auto c = cells_for(k, base);
      all.insert(all.end(), c.begin(), c.end());
    }
    return all;
  }
  std::string valid;
  for (const auto& k : ablation_keys()) valid += (valid.empty() ? "" : ", ") + k;
  throw std::invalid_argument("unknown ablation key '" + std::string(key) + "'; valid keys: " + valid);
}

// Consensus only acts at decision time, so it is excluded from the training identity.
std::string training_key(TrainConfig cfg) {
  cfg.consensus = stc::nets::ConsensusStrategy::highest_peak;
  return stc::train::config_echo(cfg);
}

struct Trained {
  stc::train::Model model;
  std::vector<stc::train::Prediction> predictions;
};

}  // namespace

std::vector<AblationRow> run_ablation(const RunConfig& cfg, std::string_view key, const DatasetSource& datasets,
                                      const ProgressFn& progress) {
  const auto cells = cells_for(key, cfg.train);
  std::map<std::string, Trained> cache;
  std::vector<AblationRow> rows;
  for (const auto& cell : cells) {
    AblationRow row;
    row.group = cell.group;
    row.setting = cell.setting;
    std::vector<double> accs;
    double mae_sum = 0.0;
    std::size_t mae_count = 0;
    for (const auto seed : cfg.seeds) {
      TrainConfig t = cell.cfg;
      t.seed = seed;
      stc::train::validate(t);
      const auto& ds = datasets(seed);
      const auto id = std::to_string(seed) + "\n" + training_key(t);
      auto it = cache.find(id);
      if (it == cache.end()) {
        if (progress) progress("training " + cell.group + " / " + cell.setting + " (seed " + std::to_string(seed) + ")");
        auto result = stc::train::train(ds, t);
        stc::train::Model model(t, ds.dim(), ds.classes());
        auto preds = stc::train::predict_all(result.params, model, ds.split(false));
        it = cache.emplace(id, Trained{std::move(model), std::move(preds)}).first;
      }
      const auto videos = ds.split(false);
      const auto report = stc::train::report_for(it->second.predictions, videos, it->second.model, t.consensus, cfg.averaging);
      const auto& m = report.classification;
      accs.push_back(m.accuracy);
      row.precision += m.precision;
      row.recall += m.recall;
      row.f1 += m.f1;
      row.average_distance += m.average_distance;
      row.mean_iou += report.mean_iou;
      if (!std::isnan(report.mae)) {
        mae_sum += report.mae;
        ++mae_count;
      }
    }
    const auto n = static_cast<double>(cfg.seeds.size());
    row.seeds = cfg.seeds.size();
    for (double a : accs) row.accuracy += a;
    row.accuracy /= n;
    for (double a : accs) row.accuracy_std += (a - row.accuracy) * (a - row.accuracy);
    row.accuracy_std = std::sqrt(row.accuracy_std / n);
    row.precision /= n;
    row.recall /= n;
    row.f1 /= n;
    row.average_distance /= n;
    row.mean_iou /= n;
    row.mae = mae_count ? mae_sum / static_cast<double>(mae_count) : std::nan("");
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::string num(double v, int digits) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << "group,setting,seeds,accuracy,accuracy_std,precision,recall,f1,ad,mae,iou\n";
  for (const auto& r : rows) {
    os << r.group << ',' << r.setting << ',' << r.seeds << ',' << pct(r.accuracy) << ',' << pct(r.accuracy_std) << ','
       << pct(r.precision) << ',' << pct(r.recall) << ',' << pct(r.f1) << ',' << num(r.average_distance, 4) << ','
       << num(r.mae, 2) << ',' << num(r.mean_iou, 4) << '\n';
  }
  return os.str();
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  char line[256];
  std::string group;
  for (const auto& r : rows) {
    if (r.group != group) {
      if (!group.empty()) os << '\n';
      group = r.group;
      os << "[" << group << "]\n";
      std::snprintf(line, sizeof line, "%-22s %9s %9s %9s %9s %7s %8s %7s\n", "setting", "acc", "+/-", "prec", "f1",
                    "AD", "MAE", "IoU");
      os << line;
    }
    std::snprintf(line, sizeof line, "%-22s %9s %9s %9s %9s %7s %8s %7s\n", r.setting.c_str(), pct(r.accuracy).c_str(),
                  pct(r.accuracy_std).c_str(), pct(r.precision).c_str(), pct(r.f1).c_str(),
                  num(r.average_distance, 2).c_str(), num(r.mae, 2).c_str(), num(r.mean_iou, 3).c_str());
    os << line;
  }
  return os.str();
}

}  // namespace stcnet
