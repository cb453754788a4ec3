#pragma once

#include "enose/classifier.hpp"

#include <optional>
#include <span>
#include <vector>

namespace enose {

enum class KernelType { Linear, Rbf };

struct Kernel {
  KernelType type = KernelType::Rbf;
  double gamma = 1.0;

  double operator()(const double* a, const double* b, Eigen::Index d) const;
};

struct SvmParams {
  KernelType kernel = KernelType::Rbf;
  /// RBF width; nullopt selects the scale heuristic 1 / (d * var(X)).
  std::optional<double> gamma;
  double C = 1.0;
  /// Stop once the maximal KKT violation m(a) - M(a) drops below tol.
  double tol = 1e-3;
  /// Iteration budget in passes; one pass is n pair updates.
  int max_passes = 200;
  /// Kernel row cache budget in MiB.
  std::size_t cache_mb = 256;

  void validate() const;
};

/// 1 / (d * var(X)) over all entries; 1 / d if X has zero variance.
double scale_gamma(const Matrix& x);

/// Two-class soft-margin machine, decision(x) = sum_i coef_i K(sv_i, x) + bias
/// with coef_i = alpha_i * y_i.
struct BinarySvm {
  Kernel kernel;
  Matrix support_vectors;
  Vector coef;
  double bias = 0.0;
  /// Only for the linear kernel: w = sum_i coef_i sv_i.
  Vector weights;

  // Optimizer diagnostics (not serialized).
  std::vector<double> alpha;  // full length n, training order
  std::vector<std::size_t> support_indices;
  std::vector<double> dual_history;  // dual objective at the end of each pass
  double kkt_gap = 0.0;
  std::size_t iterations = 0;
  bool converged = true;

  double decision(const double* row) const;

  nlohmann::json to_json() const;
  static BinarySvm from_json(const nlohmann::json& j);
};

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij,
/// evaluated directly (O(n^2)); used to check the solver.
double svm_dual_objective(const Matrix& x, std::span<const int> y, std::span<const double> alpha,
                          const Kernel& kernel);

/// Solves the box- and equality-constrained dual by pairwise coordinate
/// ascent with second-order working-set selection. Labels are -1/+1.
/// Stops on the tolerance or the pass budget; the latter returns the best
/// iterate with converged = false.
BinarySvm svm_fit_binary(const Matrix& x, std::span<const int> y, const SvmParams& params);

/// One-vs-rest machine set with softmax-over-margins probabilities.
class SvmClassifier final : public Classifier {
 public:
  SvmClassifier() = default;
  SvmClassifier(std::vector<BinarySvm> machines, int num_features)
      : machines_(std::move(machines)), num_features_(num_features) {}

  std::string kind() const override { return "svm"; }
  int num_classes() const override { return static_cast<int>(machines_.size()); }
  int num_features() const override { return num_features_; }
  Matrix predict_proba(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  bool converged() const override;
  static SvmClassifier from_json(const nlohmann::json& j);

  /// n x C matrix of one-vs-rest margins.
  Matrix decision_function(const Matrix& x) const;

  const std::vector<BinarySvm>& machines() const { return machines_; }

 private:
  std::vector<BinarySvm> machines_;
  int num_features_ = 0;
};

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& scores);

SvmClassifier svm_fit_multiclass(const Matrix& x, const Labels& y, int num_classes,
                                 const SvmParams& params, const FitOptions& options = {});

}  // namespace enose
