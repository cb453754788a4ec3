#pragma once

#include "enose/classifier.hpp"

#include <vector>

namespace enose {

/// Soft-voting combiner: unweighted mean of member probabilities, argmax
/// with lowest-index tie-break.
class VotingEnsemble final : public Classifier {
 public:
  /// Throws EmptyEnsemble for fewer than 2 members and ClassTableMismatch
  /// when members disagree on class count or feature width.
  explicit VotingEnsemble(std::vector<ClassifierPtr> members);

  std::string kind() const override { return "soft_vote"; }
  int num_classes() const override { return members_.front()->num_classes(); }
  int num_features() const override { return members_.front()->num_features(); }
  Matrix predict_proba(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  bool converged() const override;
  static VotingEnsemble from_json(const nlohmann::json& j);

  const std::vector<ClassifierPtr>& members() const { return members_; }

 private:
  std::vector<ClassifierPtr> members_;
};

/// Mean of already-computed member probability matrices. The result does
/// not depend on member order and lies within each entry's member range.
Matrix soft_vote_proba(const std::vector<Matrix>& member_probas);

}  // namespace enose
