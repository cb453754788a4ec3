#include "enose/reduce.hpp"

#include "enose/error.hpp"
#include "enose/json_util.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace enose {

namespace {

/// Flip so the largest-magnitude entry of each row is positive.
void canonical_signs(Matrix& rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < rows.cols(); ++j) {
      if (std::abs(rows(i, j)) > std::abs(rows(i, arg))) arg = j;
    }
    if (rows(i, arg) < 0.0) rows.row(i) *= -1.0;
  }
}

}  // namespace

PcaModel pca_fit(const Matrix& x, int m) {
  const auto d = static_cast<int>(x.cols());
  if (m < 1 || m > d) {
    throw Error(ErrorCode::BadComponentCount,
                "requested " + std::to_string(m) + " components for " + std::to_string(d) +
                    " features");
  }
  if (x.rows() < 2) throw Error(ErrorCode::DegenerateInput, "PCA needs at least 2 rows");
  PcaModel model;
  model.means = x.colwise().mean().transpose();
  const Matrix centered = x.rowwise() - model.means.transpose();
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  // Eigen returns ascending order.
  model.components.resize(m, d);
  model.eigenvalues.resize(m);
  for (int i = 0; i < m; ++i) {
    const int src = d - 1 - i;
    model.components.row(i) = eig.eigenvectors().col(src).transpose();
    model.eigenvalues[i] = std::max(0.0, eig.eigenvalues()[src]);
  }
  canonical_signs(model.components);
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& x) {
  if (x.cols() != model.means.size()) {
    throw Error(ErrorCode::DimensionMismatch, "PCA expects " + std::to_string(model.means.size()) +
                                                  " columns, got " + std::to_string(x.cols()));
  }
  return (x.rowwise() - model.means.transpose()) * model.components.transpose();
}

Matrix pca_reconstruct(const PcaModel& model, const Matrix& scores) {
  if (scores.cols() != model.components.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "score width does not match component count");
  }
  return (scores * model.components).rowwise() + model.means.transpose();
}

LdaModel lda_fit(const Matrix& x, const Labels& y, int m, double ridge) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorCode::ShapeMismatch, "label count does not match rows");
  }
  int num_classes = 0;
  for (int label : y) num_classes = std::max(num_classes, label + 1);
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(num_classes), 0);
  for (int label : y) ++counts[static_cast<std::size_t>(label)];
  int present = 0;
  for (auto c : counts) present += c > 0 ? 1 : 0;
  if (present < 2) throw Error(ErrorCode::SingleClass, "LDA needs at least 2 classes");
  const auto d = static_cast<int>(x.cols());
  if (m < 1 || m > present - 1 || m > d) {
    throw Error(ErrorCode::BadComponentCount,
                "requested " + std::to_string(m) + " discriminants with " +
                    std::to_string(present) + " classes and " + std::to_string(d) + " features");
  }

  LdaModel model;
  model.means = x.colwise().mean().transpose();
  model.class_means = Matrix::Zero(num_classes, d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) model.class_means.row(y[i]) += x.row(i);
  for (int c = 0; c < num_classes; ++c) {
    if (counts[c] > 0) model.class_means.row(c) /= static_cast<double>(counts[c]);
  }
  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::RowVectorXd r = x.row(i) - model.class_means.row(y[i]);
    within.noalias() += r.transpose() * r;
  }
  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(d, d);
  for (int c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) continue;
    const Eigen::RowVectorXd r = model.class_means.row(c) - model.means.transpose();
    between.noalias() += static_cast<double>(counts[c]) * (r.transpose() * r);
  }
  if (ridge < 0.0) ridge = 1e-6 * within.trace() / d;
  if (!(ridge > 0.0)) ridge = 1e-12;
  model.ridge = ridge;
  const Eigen::MatrixXd regularized = within + ridge * Eigen::MatrixXd::Identity(d, d);

  // Symmetric-definite generalized problem: S_b v = lambda (S_w + ridge I) v.
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(between, regularized);
  model.directions.resize(m, d);
  model.eigenvalues.resize(m);
  for (int i = 0; i < m; ++i) {
    const int src = d - 1 - i;
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    v.normalize();
    model.directions.row(i) = v.transpose();
    model.eigenvalues[i] = std::max(0.0, eig.eigenvalues()[src]);
  }
  canonical_signs(model.directions);
  return model;
}

Matrix lda_transform(const LdaModel& model, const Matrix& x) {
  if (x.cols() != model.means.size()) {
    throw Error(ErrorCode::DimensionMismatch, "LDA expects " + std::to_string(model.means.size()) +
                                                  " columns, got " + std::to_string(x.cols()));
  }
  return (x.rowwise() - model.means.transpose()) * model.directions.transpose();
}

nlohmann::json PcaModel::to_json() const {
  return {{"means", enose::to_json(means)},
          {"components", enose::to_json(components)},
          {"eigenvalues", enose::to_json(eigenvalues)}};
}

PcaModel PcaModel::from_json(const nlohmann::json& j) {
  PcaModel m;
  m.means = vector_from_json(j.at("means"));
  m.components = matrix_from_json(j.at("components"), m.means.size());
  m.eigenvalues = vector_from_json(j.at("eigenvalues"));
  return m;
}

nlohmann::json LdaModel::to_json() const {
  return {{"means", enose::to_json(means)},
          {"directions", enose::to_json(directions)},
          {"class_means", enose::to_json(class_means)},
          {"eigenvalues", enose::to_json(eigenvalues)},
          {"ridge", ridge}};
}

LdaModel LdaModel::from_json(const nlohmann::json& j) {
  LdaModel m;
  m.means = vector_from_json(j.at("means"));
  m.directions = matrix_from_json(j.at("directions"), m.means.size());
  m.class_means = matrix_from_json(j.at("class_means"), m.means.size());
  m.eigenvalues = vector_from_json(j.at("eigenvalues"));
  m.ridge = j.at("ridge").get<double>();
  return m;
}

}  // namespace enose
