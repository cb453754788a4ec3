#include "enose/metrics.hpp"

#include "enose/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace enose {

Confusion confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred, int num_classes) {
  if (y_true.size() != y_pred.size()) {
    throw Error(ErrorCode::ShapeMismatch, "true and predicted label counts differ");
  }
  Confusion cm = Confusion::Zero(num_classes, num_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if (t < 0 || t >= num_classes || p < 0 || p >= num_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "label pair (" + std::to_string(t) + ", " +
                                                  std::to_string(p) + ") outside [0, " +
                                                  std::to_string(num_classes) + ")");
    }
    ++cm(t, p);
  }
  return cm;
}

double f1_score(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

PrfReport prf_report(const Confusion& confusion) {
  const auto c = confusion.rows();
  if (c == 0 || confusion.cols() != c) throw Error(ErrorCode::EmptyMatrix, "confusion matrix is empty");
  PrfReport r;
  r.total = confusion.sum();
  if (r.total <= 0) throw Error(ErrorCode::EmptyMatrix, "confusion matrix has no samples");
  std::int64_t trace = 0;
  for (Eigen::Index k = 0; k < c; ++k) {
    ClassMetrics m;
    const auto tp = confusion(k, k);
    const auto row = confusion.row(k).sum();
    const auto col = confusion.col(k).sum();
    trace += tp;
    m.support = row;
    m.never_predicted = col == 0;
    m.no_support = row == 0;
    m.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    m.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    m.f1 = f1_score(m.precision, m.recall);
    r.per_class.push_back(m);
  }
  r.accuracy = static_cast<double>(trace) / static_cast<double>(r.total);
  // Both averages use the same weighted-sum form, so equal supports give
  // bit-identical macro and weighted values.
  const double uniform = 1.0 / static_cast<double>(c);
  for (const auto& m : r.per_class) {
    const double w = static_cast<double>(m.support) / static_cast<double>(r.total);
    r.macro.precision += uniform * m.precision;
    r.macro.recall += uniform * m.recall;
    r.macro.f1 += uniform * m.f1;
    r.weighted.precision += w * m.precision;
    r.weighted.recall += w * m.recall;
    r.weighted.f1 += w * m.f1;
  }
  return r;
}

RocCurve roc_curve(std::span<const int> is_positive, std::span<const double> scores) {
  if (is_positive.size() != scores.size()) {
    throw Error(ErrorCode::ShapeMismatch, "label and score counts differ");
  }
  RocCurve curve;
  const auto n = scores.size();
  std::int64_t pos = 0;
  for (int p : is_positive) pos += p != 0 ? 1 : 0;
  const auto neg = static_cast<std::int64_t>(n) - pos;
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  if (pos == 0 || neg == 0) {
    curve.defined = false;
    return curve;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::int64_t tp = 0, fp = 0;
  double area = 0.0;
  std::size_t i = 0;
  while (i < n) {
    const double t = scores[order[i]];
    while (i < n && scores[order[i]] == t) {
      (is_positive[order[i]] != 0 ? tp : fp) += 1;
      ++i;
    }
    const double x = static_cast<double>(fp) / static_cast<double>(neg);
    const double y = static_cast<double>(tp) / static_cast<double>(pos);
    area += (x - curve.fpr.back()) * (y + curve.tpr.back()) / 2.0;
    curve.fpr.push_back(x);
    curve.tpr.push_back(y);
    curve.thresholds.push_back(t);
  }
  curve.auc = area;
  return curve;
}

RocReport roc_auc(std::span<const int> y_true, const Matrix& proba) {
  if (static_cast<std::size_t>(proba.rows()) != y_true.size()) {
    throw Error(ErrorCode::ShapeMismatch, "probability rows do not match labels");
  }
  const auto n = y_true.size();
  const auto c = static_cast<int>(proba.cols());
  RocReport report;
  std::vector<int> positive(n);
  std::vector<double> scores(n);
  double macro_sum = 0.0;
  int defined = 0;
  for (int k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      positive[i] = y_true[i] == k ? 1 : 0;
      scores[i] = proba(static_cast<Eigen::Index>(i), k);
    }
    report.per_class.push_back(roc_curve(positive, scores));
    if (report.per_class.back().defined) {
      macro_sum += report.per_class.back().auc;
      ++defined;
    }
  }
  std::vector<int> pooled_pos(n * static_cast<std::size_t>(c));
  std::vector<double> pooled_scores(pooled_pos.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < c; ++k) {
      const auto at = i * static_cast<std::size_t>(c) + static_cast<std::size_t>(k);
      pooled_pos[at] = y_true[i] == k ? 1 : 0;
      pooled_scores[at] = proba(static_cast<Eigen::Index>(i), k);
    }
  }
  report.micro = roc_curve(pooled_pos, pooled_scores);
  report.micro_auc = report.micro.auc;
  report.macro_auc = defined > 0 ? macro_sum / defined : 0.0;
  return report;
}

double accuracy(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw Error(ErrorCode::ShapeMismatch, "label counts differ");
  if (y_true.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) hits += y_true[i] == y_pred[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

EvalReport evaluate_predictions(std::span<const int> y_true, const Matrix& proba,
                                const std::vector<std::string>& classes) {
  if (proba.cols() != static_cast<Eigen::Index>(classes.size())) {
    throw Error(ErrorCode::ClassTableMismatch, "probability width does not match class table");
  }
  EvalReport r;
  r.classes = classes;
  const auto pred = argmax_rows(proba);
  r.confusion = confusion_matrix(y_true, pred, static_cast<int>(classes.size()));
  r.prf = prf_report(r.confusion);
  r.roc = roc_auc(y_true, proba);
  return r;
}

nlohmann::json EvalReport::to_json() const {
  auto confusion_rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < confusion.rows(); ++i) {
    std::vector<std::int64_t> row(confusion.row(i).data(), confusion.row(i).data() + confusion.cols());
    confusion_rows.push_back(row);
  }
  auto per_class = nlohmann::json::object();
  auto auc_per_class = nlohmann::json::object();
  std::vector<std::string> degenerate;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const auto& m = prf.per_class[k];
    per_class[classes[k]] = {{"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"support", m.support}};
    if (m.never_predicted || m.no_support) degenerate.push_back(classes[k]);
    const auto& curve = roc.per_class[k];
    auc_per_class[classes[k]] = curve.defined ? nlohmann::json(curve.auc) : nlohmann::json(nullptr);
  }
  auto avg = [](const MetricAverages& a) {
    return nlohmann::json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
  };
  return {{"accuracy", prf.accuracy},
          {"confusion", confusion_rows},
          {"classes", classes},
          {"per_class", per_class},
          {"macro", avg(prf.macro)},
          {"weighted", avg(prf.weighted)},
          {"degenerate_classes", degenerate},
          {"auc", {{"micro", roc.micro_auc}, {"macro", roc.macro_auc}, {"per_class", auc_per_class}}}};
}

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string EvalReport::classification_csv() const {
  std::ostringstream out;
  out << "class,precision,recall,f1-score,support\n";
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const auto& m = prf.per_class[k];
    out << classes[k] << ',' << fixed4(m.precision) << ',' << fixed4(m.recall) << ','
        << fixed4(m.f1) << ',' << m.support << '\n';
  }
  out << "accuracy,,," << fixed4(prf.accuracy) << ',' << prf.total << '\n';
  out << "macro avg," << fixed4(prf.macro.precision) << ',' << fixed4(prf.macro.recall) << ','
      << fixed4(prf.macro.f1) << ',' << prf.total << '\n';
  out << "weighted avg," << fixed4(prf.weighted.precision) << ',' << fixed4(prf.weighted.recall)
      << ',' << fixed4(prf.weighted.f1) << ',' << prf.total << '\n';
  return out.str();
}

std::string EvalReport::confusion_csv() const {
  std::ostringstream out;
  out << "true\\predicted";
  for (const auto& c : classes) out << ',' << c;
  out << '\n';
  for (Eigen::Index i = 0; i < confusion.rows(); ++i) {
    out << classes[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < confusion.cols(); ++j) out << ',' << confusion(i, j);
    out << '\n';
  }
  return out.str();
}

std::string EvalReport::roc_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "curve,fpr,tpr,threshold\n";
  auto emit = [&](const std::string& name, const RocCurve& c) {
    for (std::size_t i = 0; i < c.fpr.size(); ++i) {
      out << name << ',' << c.fpr[i] << ',' << c.tpr[i] << ',';
      if (std::isinf(c.thresholds[i])) {
        out << "inf";
      } else {
        out << c.thresholds[i];
      }
      out << '\n';
    }
  };
  for (std::size_t k = 0; k < classes.size(); ++k) emit(classes[k], roc.per_class[k]);
  emit("micro", roc.micro);
  return out.str();
}

}  // namespace enose
