#pragma once

#include "enose/tree.hpp"

#include <cstdint>
#include <string>
#include <variant>

namespace enose {

/// Per-split feature budget: "sqrt", "log2", "all", or a fraction in (0, 1].
struct MaxFeatures {
  enum class Rule { Sqrt, Log2, All, Fraction };
  Rule rule = Rule::Sqrt;
  double fraction = 1.0;

  /// Budget for d features, rounded up and at least 1.
  int resolve(int d) const;
  std::string to_string() const;
  static MaxFeatures parse(const std::string& text);
};

struct ForestParams {
  int n_estimators = 100;
  MaxFeatures max_features;
  bool bootstrap = true;
  TreeParams tree;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Bagged CART ensemble; probability is the unweighted mean of the trees'.
class RandomForest final : public Classifier {
 public:
  RandomForest() = default;
  RandomForest(std::vector<DecisionTree> trees, int num_classes, int num_features)
      : trees_(std::move(trees)), num_classes_(num_classes), num_features_(num_features) {}

  std::string kind() const override { return "random_forest"; }
  int num_classes() const override { return num_classes_; }
  int num_features() const override { return num_features_; }
  Matrix predict_proba(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  static RandomForest from_json(const nlohmann::json& j);

  const std::vector<DecisionTree>& trees() const { return trees_; }

 private:
  std::vector<DecisionTree> trees_;
  int num_classes_ = 0;
  int num_features_ = 0;
};

/// Tree t draws its bootstrap sample and feature subsets from the stream
/// derived from (seed, "forest", t), so the fitted model does not depend
/// on the worker count.
RandomForest rf_fit(const Matrix& x, const Labels& y, int num_classes, const ForestParams& params,
                    const FitOptions& options = {});

}  // namespace enose
