#pragma once

#include "enose/types.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <memory>
#include <string>

namespace enose {

/// Version tag written into every serialized model document.
inline constexpr int kModelFormatVersion = 1;

struct FitOptions {
  /// Upper bound on threads used inside a single fit (trees, OvR machines).
  std::size_t workers = 1;
};

/// A fitted multiclass predictor. predict_proba returns an n x C
/// row-stochastic matrix; predict is its row argmax (lowest index on ties).
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string kind() const = 0;
  virtual int num_classes() const = 0;
  virtual int num_features() const = 0;
  virtual Matrix predict_proba(const Matrix& x) const = 0;
  virtual nlohmann::json to_json() const = 0;

  /// False when the fit stopped on an iteration budget.
  virtual bool converged() const { return true; }

  Labels predict(const Matrix& x) const { return argmax_rows(predict_proba(x)); }

 protected:
  void check_columns(const Matrix& x) const;
};

using ClassifierPtr = std::shared_ptr<const Classifier>;

/// Rebuilds any model written by Classifier::to_json.
ClassifierPtr classifier_from_json(const nlohmann::json& j);

}  // namespace enose
