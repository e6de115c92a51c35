#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stc/eval/metrics.hpp"

namespace stc::eval {

struct VideoRecord {
  std::size_t id = 0;
  int label = 0;
  int predicted = 0;
  std::size_t timestamp = 0;
  /// Only meaningful when the run localizes (has_localization).
  std::size_t predicted_timestamp = 0;
  std::size_t proposals = 0;
  double best_iou = 0.0;
  bool has_localization = false;
};

struct EvalReport {
  std::size_t classes = 0;
  Averaging averaging = Averaging::macro;
  ClassificationMetrics classification;
  /// NaN when no video carries a localization output.
  double mae = 0.0;
  double mean_iou = 0.0;
  std::vector<VideoRecord> records;
};

EvalReport make_report(std::vector<VideoRecord> records, std::size_t classes, Averaging averaging = Averaging::macro);

/// Aligned plain-text summary with the confusion matrix.
std::string format_table(const EvalReport& report);
/// Structured report including every per-video record. NaN becomes null.
std::string to_json(const EvalReport& report, int indent = 2);
/// Confusion matrix as CSV: header "true\\pred,1,..,C", one row per true grade.
std::string confusion_csv(const EvalReport& report);
/// Per-video records as CSV.
std::string records_csv(const EvalReport& report);

}  // namespace stc::eval
