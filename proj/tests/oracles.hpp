#pragma once

// Reference implementations that the library is checked against. Each one
// is written from the definition, deliberately naive, and shares no code
// with src/.

#include "enose/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

namespace enose::oracle {

struct BruteSplit {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

inline double gini_of(const std::vector<int>& labels, int classes) {
  if (labels.empty()) return 0.0;
  std::vector<double> counts(static_cast<std::size_t>(classes), 0.0);
  for (int y : labels) counts[static_cast<std::size_t>(y)] += 1.0;
  double s = 0.0;
  for (double c : counts) s += (c / labels.size()) * (c / labels.size());
  return 1.0 - s;
}

/// Tries every feature and every midpoint between consecutive distinct
/// values; keeps the largest weighted Gini decrease, earliest feature then
/// smallest threshold when gains agree within 1e-12. A pure node is a leaf.
inline BruteSplit best_root_split(const Matrix& x, const Labels& y, int classes) {
  const double parent = gini_of(y, classes);
  const double n = static_cast<double>(y.size());
  BruteSplit best;
  if (std::set<int>(y.begin(), y.end()).size() <= 1) return best;
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    std::set<double> distinct;
    for (Eigen::Index i = 0; i < x.rows(); ++i) distinct.insert(x(i, f));
    std::vector<double> v(distinct.begin(), distinct.end());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      const double t = 0.5 * (v[k] + v[k + 1]);
      std::vector<int> left, right;
      for (Eigen::Index i = 0; i < x.rows(); ++i) (x(i, f) <= t ? left : right).push_back(y[i]);
      const double gain = parent - (left.size() / n) * gini_of(left, classes) -
                          (right.size() / n) * gini_of(right, classes);
      if (best.feature < 0 || gain > best.gain + 1e-12) best = {static_cast<int>(f), t, gain};
    }
  }
  return best;
}

/// Highest training accuracy any partition of feature space can reach:
/// identical rows must share a prediction, so each group scores its
/// majority count.
inline double training_accuracy_ceiling(const Matrix& x, const Labels& y) {
  std::map<std::vector<double>, std::map<int, int>> groups;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    groups[std::vector<double>(x.row(i).data(), x.row(i).data() + x.cols())][y[i]]++;
  }
  int hit = 0;
  for (const auto& [row, counts] : groups) {
    int m = 0;
    for (const auto& [label, c] : counts) m = std::max(m, c);
    hit += m;
  }
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

/// Table fixture row: true positives and predicted-column total for one
/// class with support 2000. These integer counts reproduce every printed
/// precision/recall pair to four decimals.
struct TableRow {
  const char* name;
  std::int64_t tp;
  std::int64_t colsum;
  double precision;
  double recall;
  double f1;
};

// Classification report of the soft-vote ensemble.
inline const std::vector<TableRow>& ensemble_table() {
  static const std::vector<TableRow> rows = {
      {"apple_juice", 1807, 1974, 0.9154, 0.9035, 0.9094},
      {"cardamom", 2000, 2003, 0.9985, 1.0000, 0.9993},
      {"cinnamon", 1997, 1997, 1.0000, 0.9985, 0.9992},
      {"expired_apple_juice", 1833, 2026, 0.9047, 0.9165, 0.9106},
      {"expired_garlic", 1896, 1988, 0.9537, 0.9480, 0.9509},
      {"expired_ginger", 1999, 2004, 0.9975, 0.9995, 0.9985},
      {"expired_onion", 1677, 1958, 0.8565, 0.8385, 0.8474},
      {"garlic", 1908, 2012, 0.9483, 0.9540, 0.9511},
      {"ginger", 1995, 1996, 0.9995, 0.9975, 0.9985},
      {"onion", 1719, 2042, 0.8418, 0.8595, 0.8506},
  };
  return rows;
}

// Classification report of the tuned random forest.
inline const std::vector<TableRow>& forest_table() {
  static const std::vector<TableRow> rows = {
      {"apple_juice", 1824, 1988, 0.9175, 0.9120, 0.9147},
      {"cardamom", 2000, 2000, 1.0000, 1.0000, 1.0000},
      {"cinnamon", 2000, 2000, 1.0000, 1.0000, 1.0000},
      {"expired_apple_juice", 1836, 2012, 0.9125, 0.9180, 0.9153},
      {"expired_garlic", 1896, 1988, 0.9537, 0.9480, 0.9509},
      {"expired_ginger", 1998, 2003, 0.9975, 0.9990, 0.9983},
      {"expired_onion", 1678, 1959, 0.8566, 0.8390, 0.8477},
      {"garlic", 1908, 2012, 0.9483, 0.9540, 0.9511},
      {"ginger", 1995, 1997, 0.9990, 0.9975, 0.9982},
      {"onion", 1719, 2041, 0.8422, 0.8595, 0.8508},
  };
  return rows;
}

/// A confusion matrix with the table's diagonal, row sums of 2000 and the
/// given column sums. Off-diagonal mass goes one unit at a time from the row
/// with the most spare count to the other column needing the most.
inline Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> confusion_from_table(
    const std::vector<TableRow>& rows) {
  const auto c = static_cast<Eigen::Index>(rows.size());
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m =
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(c, c);
  std::vector<std::int64_t> row_left(rows.size()), col_left(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = rows[k].tp;
    row_left[k] = 2000 - rows[k].tp;
    col_left[k] = rows[k].colsum - rows[k].tp;
  }
  for (;;) {
    const auto i = static_cast<std::size_t>(std::max_element(row_left.begin(), row_left.end()) - row_left.begin());
    if (row_left[i] == 0) break;
    std::size_t j = i;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (k != i && (j == i || col_left[k] > col_left[j])) j = k;
    }
    if (col_left[j] > 0) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += 1;
      --row_left[i];
      --col_left[j];
      continue;
    }
    // Only column i still needs mass: reroute one unit (a, b) through
    // (a, i) and (i, b), which keeps every other margin fixed.
    bool moved = false;
    for (Eigen::Index a = 0; a < c && !moved; ++a) {
      for (Eigen::Index b = 0; b < c && !moved; ++b) {
        const auto ii = static_cast<Eigen::Index>(i);
        if (a == b || a == ii || b == ii || m(a, b) == 0) continue;
        --m(a, b);
        ++m(a, ii);
        ++m(ii, b);
        --row_left[i];
        --col_left[i];
        moved = true;
      }
    }
    if (!moved) break;
  }
  return m;
}

/// Pairwise-comparison AUC: P(score_pos > score_neg) + 0.5 P(equal).
inline double pairwise_auc(const std::vector<int>& positive, const std::vector<double>& scores) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positive[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

}  // namespace enose::oracle
