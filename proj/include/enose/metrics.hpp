#pragma once

#include "enose/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace enose {

/// Rows are true classes, columns predicted classes.
using Confusion = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Confusion confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred, int num_classes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
  /// Set when the class was never predicted (precision 0 by convention).
  bool never_predicted = false;
  /// Set when the class has no true samples (recall 0 by convention).
  bool no_support = false;
};

struct MetricAverages {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct PrfReport {
  std::vector<ClassMetrics> per_class;
  MetricAverages macro;
  MetricAverages weighted;
  double accuracy = 0.0;
  std::int64_t total = 0;
};

/// Per-class precision/recall/F1 with the zero-division convention
/// (0 and a flag), unweighted and support-weighted averages, accuracy.
PrfReport prf_report(const Confusion& confusion);

/// F1 from a precision/recall pair; 0 when both are 0.
double f1_score(double precision, double recall);

struct RocCurve {
  std::vector<double> fpr;
  std::vector<double> tpr;
  /// Threshold producing each point; the first is +infinity.
  std::vector<double> thresholds;
  double auc = 0.0;
  /// False when the class has no positives or no negatives.
  bool defined = true;
};

/// Sweeps every distinct score as a threshold (score >= t is positive),
/// starting from the +infinity sentinel. AUC by the trapezoidal rule.
RocCurve roc_curve(std::span<const int> is_positive, std::span<const double> scores);

struct RocReport {
  std::vector<RocCurve> per_class;
  RocCurve micro;
  double micro_auc = 0.0;
  /// Mean over classes whose AUC is defined.
  double macro_auc = 0.0;
};

/// One-vs-rest curves per class plus the pooled (micro) curve.
RocReport roc_auc(std::span<const int> y_true, const Matrix& proba);

struct EvalReport {
  std::vector<std::string> classes;
  Confusion confusion;
  PrfReport prf;
  RocReport roc;

  nlohmann::json to_json() const;
  /// `class,precision,recall,f1-score,support` plus accuracy and averages.
  std::string classification_csv() const;
  std::string confusion_csv() const;
  /// `curve,fpr,tpr,threshold` for every class and the micro curve.
  std::string roc_csv() const;
};

EvalReport evaluate_predictions(std::span<const int> y_true, const Matrix& proba,
                                const std::vector<std::string>& classes);

double accuracy(std::span<const int> y_true, std::span<const int> y_pred);

}  // namespace enose
