#include "enose/classifier.hpp"
#include "enose/ensemble.hpp"
#include "enose/error.hpp"
#include "enose/forest.hpp"
#include "enose/neural.hpp"
#include "enose/svm.hpp"
#include "enose/tree.hpp"

namespace enose {

ClassifierPtr classifier_from_json(const nlohmann::json& j) {
  try {
    const auto version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::Format, "unsupported model format version " + std::to_string(version));
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "decision_tree") return std::make_shared<DecisionTree>(DecisionTree::from_json(j));
    if (kind == "random_forest") return std::make_shared<RandomForest>(RandomForest::from_json(j));
    if (kind == "svm") return std::make_shared<SvmClassifier>(SvmClassifier::from_json(j));
    if (kind == "mlp") return std::make_shared<Mlp>(Mlp::from_json(j));
    if (kind == "soft_vote") return std::make_shared<VotingEnsemble>(VotingEnsemble::from_json(j));
    throw Error(ErrorCode::Format, "unknown model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("malformed model document: ") + e.what());
  }
}

}  // namespace enose
