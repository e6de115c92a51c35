#include "stc/eval/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace stc::eval {

EvalReport make_report(std::vector<VideoRecord> records, std::size_t classes, Averaging averaging) {
  EvalReport r;
  r.classes = classes;
  r.averaging = averaging;
  std::vector<int> pred, label;
  std::vector<std::size_t> t_hat, t;
  double iou_sum = 0.0;
  for (const auto& v : records) {
    pred.push_back(v.predicted);
    label.push_back(v.label);
    if (v.has_localization) {
      t_hat.push_back(v.predicted_timestamp);
      t.push_back(v.timestamp);
    }
    iou_sum += v.best_iou;
  }
  r.classification = classification_metrics(pred, label, classes, averaging);
  r.mae = t.empty() ? std::numeric_limits<double>::quiet_NaN() : localization_mae(t_hat, t);
  r.mean_iou = iou_sum / static_cast<double>(records.size());
  r.records = std::move(records);
  return r;
}

namespace {

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

nlohmann::json number_or_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

}  // namespace

std::string format_table(const EvalReport& report) {
  const auto& m = report.classification;
  std::ostringstream os;
  os << "videos     " << report.records.size() << '\n'
     << "accuracy   " << fixed(100.0 * m.accuracy, 2) << " %\n"
     << "precision  " << fixed(100.0 * m.precision, 2) << (report.averaging == Averaging::macro ? " (macro)" : " (micro)") << '\n'
     << "recall     " << fixed(100.0 * m.recall, 2) << '\n'
     << "f1         " << fixed(100.0 * m.f1, 2) << '\n'
     << "AD         " << fixed(m.average_distance, 4) << '\n'
     << "MAE        " << fixed(report.mae, 2) << " frames\n"
     << "window IoU " << fixed(report.mean_iou, 4) << '\n'
     << "\nconfusion (rows: true grade, columns: predicted)\n      ";
  for (std::size_t j = 0; j < report.classes; ++j) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%6zu", j + 1);
    os << buf;
  }
  os << '\n';
  for (std::size_t i = 0; i < report.classes; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%6zu", i + 1);
    os << buf;
    for (std::size_t j = 0; j < report.classes; ++j) {
      std::snprintf(buf, sizeof buf, "%6zu", m.confusion[i][j]);
      os << buf;
    }
    os << '\n';
  }
  for (const auto& w : m.warnings) os << "warning: " << w << '\n';
  return os.str();
}

std::string to_json(const EvalReport& report, int indent) {
  const auto& m = report.classification;
  nlohmann::json j;
  j["classes"] = report.classes;
  j["averaging"] = report.averaging == Averaging::macro ? "macro" : "micro";
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["average_distance"] = m.average_distance;
  j["mae"] = number_or_null(report.mae);
  j["mean_iou"] = report.mean_iou;
  j["confusion"] = m.confusion;
  j["warnings"] = m.warnings;
  auto& recs = j["videos"] = nlohmann::json::array();
  for (const auto& v : report.records) {
    nlohmann::json r;
    r["id"] = v.id;
    r["label"] = v.label;
    r["predicted"] = v.predicted;
    r["timestamp"] = v.timestamp;
    r["predicted_timestamp"] = v.has_localization ? nlohmann::json(v.predicted_timestamp) : nlohmann::json(nullptr);
    r["proposals"] = v.proposals;
    r["best_iou"] = v.best_iou;
    recs.push_back(std::move(r));
  }
  return j.dump(indent) + "\n";
}

std::string confusion_csv(const EvalReport& report) {
  std::ostringstream os;
  os << "true\\pred";
  for (std::size_t j = 0; j < report.classes; ++j) os << ',' << j + 1;
  os << '\n';
  for (std::size_t i = 0; i < report.classes; ++i) {
    os << i + 1;
    for (std::size_t j = 0; j < report.classes; ++j) os << ',' << report.classification.confusion[i][j];
    os << '\n';
  }
  return os.str();
}

std::string records_csv(const EvalReport& report) {
  std::ostringstream os;
  os << "id,label,predicted,timestamp,predicted_timestamp,proposals,best_iou\n";
  for (const auto& v : report.records) {
    os << v.id << ',' << v.label << ',' << v.predicted << ',' << v.timestamp << ',';
    if (v.has_localization) os << v.predicted_timestamp;
    os << ',' << v.proposals << ',' << fixed(v.best_iou, 6) << '\n';
  }
  return os.str();
}

}  // namespace stc::eval
