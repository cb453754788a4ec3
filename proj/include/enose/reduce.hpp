#pragma once

#include "enose/types.hpp"

#include <nlohmann/json.hpp>

namespace enose {

/// Principal component projection. `components` rows are orthonormal and
/// ordered by descending eigenvalue of the sample covariance.
struct PcaModel {
  Vector means;
  Matrix components;  // m x d
  Vector eigenvalues;  // length m

  int num_components() const { return static_cast<int>(components.rows()); }

  nlohmann::json to_json() const;
  static PcaModel from_json(const nlohmann::json& j);
};

/// Fits PCA on n x d data, keeping m components. Eigenvalues use the
/// (n - 1) sample covariance. Each component is signed so its
/// largest-magnitude entry is positive.
PcaModel pca_fit(const Matrix& x, int m);

/// (x - means) * components^T
Matrix pca_transform(const PcaModel& model, const Matrix& x);

/// scores * components + means
Matrix pca_reconstruct(const PcaModel& model, const Matrix& scores);

/// Fisher discriminant projection.
struct LdaModel {
  Vector means;
  Matrix directions;  // m x d, unit rows
  Matrix class_means;  // C x d
  Vector eigenvalues;  // length m
  double ridge = 0.0;

  int num_components() const { return static_cast<int>(directions.rows()); }

  nlohmann::json to_json() const;
  static LdaModel from_json(const nlohmann::json& j);
};

/// Top-m eigenvectors of (S_w + ridge I)^-1 S_b. A negative `ridge` selects
/// the default 1e-6 * trace(S_w) / d.
LdaModel lda_fit(const Matrix& x, const Labels& y, int m, double ridge = -1.0);

/// (x - means) * directions^T
Matrix lda_transform(const LdaModel& model, const Matrix& x);

}  // namespace enose
