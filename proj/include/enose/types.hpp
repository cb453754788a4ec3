#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace enose {

/// Row-major so that a sample is a contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Labels = std::vector<int>;

/// Index of the largest entry; ties go to the lowest index.
inline int argmax_lowest(const Eigen::Ref<const RowVector>& row) {
  int best = 0;
  for (Eigen::Index k = 1; k < row.size(); ++k) {
    if (row[k] > row[best]) best = static_cast<int>(k);
  }
  return best;
}

inline Labels argmax_rows(const Matrix& proba) {
  Labels out(static_cast<std::size_t>(proba.rows()));
  for (Eigen::Index i = 0; i < proba.rows(); ++i) out[i] = argmax_lowest(proba.row(i));
  return out;
}

/// Mean of a small set of values that is independent of their order,
/// reproduces a repeated value exactly, and never leaves [min, max].
/// Values are sorted, then accumulated as offsets from the minimum.
double order_free_mean(std::span<double> values);

/// Rows of `x` selected by `rows`, in the given order.
Matrix select_rows(const Matrix& x, std::span<const std::size_t> rows);

}  // namespace enose
