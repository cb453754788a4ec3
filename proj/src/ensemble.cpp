#include "enose/ensemble.hpp"

#include "enose/error.hpp"

namespace enose {

Matrix soft_vote_proba(const std::vector<Matrix>& member_probas) {
  if (member_probas.empty()) throw Error(ErrorCode::EmptyEnsemble, "no member probabilities");
  const auto rows = member_probas.front().rows();
  const auto cols = member_probas.front().cols();
  for (const auto& p : member_probas) {
    if (p.rows() != rows || p.cols() != cols) {
      throw Error(ErrorCode::ClassTableMismatch, "member probability shapes differ");
    }
  }
  Matrix out(rows, cols);
  std::vector<double> cell(member_probas.size());
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) {
      for (std::size_t m = 0; m < member_probas.size(); ++m) cell[m] = member_probas[m](i, k);
      out(i, k) = order_free_mean(cell);
    }
  }
  return out;
}

VotingEnsemble::VotingEnsemble(std::vector<ClassifierPtr> members) : members_(std::move(members)) {
  if (members_.size() < 2) throw Error(ErrorCode::EmptyEnsemble, "soft voting needs at least 2 members");
  for (const auto& m : members_) {
    if (!m) throw Error(ErrorCode::EmptyEnsemble, "null ensemble member");
    if (m->num_classes() != members_.front()->num_classes()) {
      throw Error(ErrorCode::ClassTableMismatch, "members disagree on the class table");
    }
    if (m->num_features() != members_.front()->num_features()) {
      throw Error(ErrorCode::DimensionMismatch, "members disagree on the feature space");
    }
  }
}

Matrix VotingEnsemble::predict_proba(const Matrix& x) const {
  check_columns(x);
  std::vector<Matrix> probas;
  probas.reserve(members_.size());
  for (const auto& m : members_) probas.push_back(m->predict_proba(x));
  return soft_vote_proba(probas);
}

bool VotingEnsemble::converged() const {
  for (const auto& m : members_) {
    if (!m->converged()) return false;
  }
  return true;
}

nlohmann::json VotingEnsemble::to_json() const {
  auto members = nlohmann::json::array();
  for (const auto& m : members_) members.push_back(m->to_json());
  return {{"format_version", kModelFormatVersion},
          {"kind", kind()},
          {"num_classes", num_classes()},
          {"num_features", num_features()},
          {"members", std::move(members)}};
}

VotingEnsemble VotingEnsemble::from_json(const nlohmann::json& j) {
  std::vector<ClassifierPtr> members;
  for (const auto& m : j.at("members")) members.push_back(classifier_from_json(m));
  return VotingEnsemble(std::move(members));
}

}  // namespace enose
