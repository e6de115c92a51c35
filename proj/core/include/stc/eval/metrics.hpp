#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace stc::eval {

enum class Averaging { macro, micro };

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Mean |predicted grade - true grade|.
  double average_distance = 0.0;
  /// confusion[true - 1][predicted - 1].
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<std::string> warnings;
};

/// Grades are 1..classes. Macro averaging gives every class equal weight;
/// a class with no true and no predicted samples scores 0 and adds a
/// warning. Undefined per-class ratios (0/0) count as 0.
ClassificationMetrics classification_metrics(std::span<const int> predictions, std::span<const int> labels,
                                             std::size_t classes, Averaging averaging = Averaging::macro);

/// Mean |predicted - truth| in frames.
double localization_mae(std::span<const std::size_t> predicted, std::span<const std::size_t> truth);

/// Half-open frame interval [begin, end).
struct Interval {
  std::size_t begin = 0;
  std::size_t end = 0;
};

double interval_iou(const Interval& a, const Interval& b);
/// Largest IoU between any window and the segment; 0 for an empty list.
double best_iou(std::span<const Interval> windows, const Interval& segment);
/// Mean over videos of best_iou.
double window_iou(std::span<const std::vector<Interval>> proposals, std::span<const Interval> segments);

}  // namespace stc::eval
