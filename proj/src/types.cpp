#include "enose/types.hpp"

#include <algorithm>

namespace enose {

double order_free_mean(std::span<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double lo = values.front();
  const double hi = values.back();
  double offset = 0.0;
  for (double v : values) offset += v - lo;
  return std::clamp(lo + offset / static_cast<double>(values.size()), lo, hi);
}

Matrix select_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace enose
