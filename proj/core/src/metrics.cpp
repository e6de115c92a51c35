#include "stc/eval/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace stc::eval {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

ClassificationMetrics classification_metrics(std::span<const int> predictions, std::span<const int> labels,
                                             std::size_t classes, Averaging averaging) {
  if (predictions.empty()) throw std::invalid_argument("classification_metrics: empty input");
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("classification_metrics: " + std::to_string(predictions.size()) + " predictions vs " +
                                std::to_string(labels.size()) + " labels");
  }
  if (classes == 0) throw std::invalid_argument("classification_metrics: class count must be positive");
  const auto c = static_cast<int>(classes);

  ClassificationMetrics m;
  m.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  std::size_t correct = 0;
  double distance = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int p = predictions[i];
    const int y = labels[i];
    if (y < 1 || y > c) throw std::invalid_argument("classification_metrics: label " + std::to_string(y) + " outside 1.." + std::to_string(c));
    if (p < 1 || p > c) throw std::invalid_argument("classification_metrics: prediction " + std::to_string(p) + " outside 1.." + std::to_string(c));
    ++m.confusion[static_cast<std::size_t>(y - 1)][static_cast<std::size_t>(p - 1)];
    correct += p == y ? 1 : 0;
    distance += std::abs(p - y);
  }
  const auto n = static_cast<double>(predictions.size());
  m.accuracy = static_cast<double>(correct) / n;
  m.average_distance = distance / n;

  if (averaging == Averaging::micro) {
    // Single-label multiclass: every false positive is someone's false negative.
    m.precision = m.recall = m.f1 = m.accuracy;
    return m;
  }

  double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
  for (std::size_t k = 0; k < classes; ++k) {
    double tp = static_cast<double>(m.confusion[k][k]);
    double support = 0.0, predicted = 0.0;
    for (std::size_t j = 0; j < classes; ++j) {
      support += static_cast<double>(m.confusion[k][j]);
      predicted += static_cast<double>(m.confusion[j][k]);
    }
    if (support == 0.0 && predicted == 0.0) {
      m.warnings.push_back("class " + std::to_string(k + 1) + " absent from labels and predictions; scored 0");
    }
    const double prec = ratio(tp, predicted);
    const double rec = ratio(tp, support);
    p_sum += prec;
    r_sum += rec;
    f_sum += ratio(2.0 * prec * rec, prec + rec);
  }
  const auto cc = static_cast<double>(classes);
  m.precision = p_sum / cc;
  m.recall = r_sum / cc;
  m.f1 = f_sum / cc;
  return m;
}

double localization_mae(std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
  if (predicted.empty()) throw std::invalid_argument("localization_mae: empty input");
  if (predicted.size() != truth.size()) throw std::invalid_argument("localization_mae: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    s += predicted[i] > truth[i] ? static_cast<double>(predicted[i] - truth[i])
                                 : static_cast<double>(truth[i] - predicted[i]);
  }
  return s / static_cast<double>(predicted.size());
}

double interval_iou(const Interval& a, const Interval& b) {
  const std::size_t lo = std::max(a.begin, b.begin);
  const std::size_t hi = std::min(a.end, b.end);
  const std::size_t inter = hi > lo ? hi - lo : 0;
  const std::size_t len_a = a.end > a.begin ? a.end - a.begin : 0;
  const std::size_t len_b = b.end > b.begin ? b.end - b.begin : 0;
  const std::size_t uni = len_a + len_b - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double best_iou(std::span<const Interval> windows, const Interval& segment) {
  double best = 0.0;
  for (const auto& w : windows) best = std::max(best, interval_iou(w, segment));
  return best;
}

double window_iou(std::span<const std::vector<Interval>> proposals, std::span<const Interval> segments) {
  if (proposals.size() != segments.size()) throw std::invalid_argument("window_iou: length mismatch");
  if (proposals.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < proposals.size(); ++i) s += best_iou(proposals[i], segments[i]);
  return s / static_cast<double>(proposals.size());
}

}  // namespace stc::eval
