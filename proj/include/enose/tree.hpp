#pragma once

#include "enose/classifier.hpp"
#include "enose/rng.hpp"

#include <optional>
#include <span>
#include <vector>

namespace enose {

struct TreeParams {
  std::optional<int> max_depth;  // nullopt: unlimited
  int min_samples_split = 2;
  int min_samples_leaf = 1;

  void validate() const;
};

/// 1 - sum_k (n_k / n)^2. Throws EmptyNode when all counts are zero.
double gini_impurity(std::span<const double> counts);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double gain = 0.0;  // Gini decrease of the split, internal nodes only
  std::vector<double> counts;  // leaves only

  bool is_leaf() const { return feature < 0; }
};

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

/// CART classification tree on Gini impurity. Samples with
/// x[feature] <= threshold go left.
class DecisionTree final : public Classifier {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, int num_classes, int num_features)
      : nodes_(std::move(nodes)), num_classes_(num_classes), num_features_(num_features) {}

  std::string kind() const override { return "decision_tree"; }
  int num_classes() const override { return num_classes_; }
  int num_features() const override { return num_features_; }
  Matrix predict_proba(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  static DecisionTree from_json(const nlohmann::json& j);

  /// Class frequencies of the leaf reached by one sample.
  void leaf_proba(const double* row, double* out) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;
  /// Root split, or feature -1 when the root is a leaf.
  SplitChoice root_split() const;

 private:
  std::vector<TreeNode> nodes_;
  int num_classes_ = 0;
  int num_features_ = 0;
};

/// Greedy recursive binary splitting. Candidate thresholds are
/// midpoints of consecutive distinct values; the best weighted Gini
/// decrease wins and ties go to the lower feature, then lower threshold.
DecisionTree dt_fit(const Matrix& x, const Labels& y, int num_classes, const TreeParams& params);

/// Tree growth shared with the forest: grows on the multiset `samples`
/// (bootstrap duplicates allowed), drawing `max_features` candidate
/// features per node from `rng` when max_features < d.
DecisionTree grow_tree(const Matrix& x, const Labels& y, int num_classes,
                       std::span<const std::size_t> samples, const TreeParams& params,
                       int max_features, Rng* rng);

}  // namespace enose
