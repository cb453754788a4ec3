#include "enose/forest.hpp"

#include "enose/error.hpp"
#include "enose/parallel.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace enose {

int MaxFeatures::resolve(int d) const {
  double budget = d;
  switch (rule) {
    case Rule::Sqrt: budget = std::ceil(std::sqrt(static_cast<double>(d))); break;
    case Rule::Log2: budget = std::ceil(std::log2(static_cast<double>(d))); break;
    case Rule::All: budget = d; break;
    case Rule::Fraction: budget = std::ceil(fraction * d - 1e-12); break;
  }
  return std::clamp(static_cast<int>(budget), 1, std::max(d, 1));
}

std::string MaxFeatures::to_string() const {
  switch (rule) {
    case Rule::Sqrt: return "sqrt";
    case Rule::Log2: return "log2";
    case Rule::All: return "all";
    case Rule::Fraction: {
      std::ostringstream out;
      out << fraction;
      return out.str();
    }
  }
  return "sqrt";
}

MaxFeatures MaxFeatures::parse(const std::string& text) {
  if (text == "sqrt") return {Rule::Sqrt, 1.0};
  if (text == "log2") return {Rule::Log2, 1.0};
  if (text == "all" || text == "none") return {Rule::All, 1.0};
  try {
    std::size_t used = 0;
    const double f = std::stod(text, &used);
    if (used == text.size() && f > 0.0 && f <= 1.0) return {Rule::Fraction, f};
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::BadParameter, "max_features must be sqrt, log2, all or a fraction in (0,1]: '" + text + "'");
}

void ForestParams::validate() const {
  if (n_estimators < 1) throw Error(ErrorCode::BadParameter, "n_estimators must be >= 1");
  if (max_features.rule == MaxFeatures::Rule::Fraction &&
      !(max_features.fraction > 0.0 && max_features.fraction <= 1.0)) {
    throw Error(ErrorCode::BadParameter, "max_features fraction must lie in (0, 1]");
  }
  tree.validate();
}

RandomForest rf_fit(const Matrix& x, const Labels& y, int num_classes, const ForestParams& params,
                    const FitOptions& options) {
  params.validate();
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorCode::ShapeMismatch, "label count does not match rows");
  }
  if (y.empty()) throw Error(ErrorCode::EmptyInput, "cannot fit a forest on zero samples");
  const auto n = y.size();
  const int budget = params.max_features.resolve(static_cast<int>(x.cols()));
  std::vector<DecisionTree> trees(static_cast<std::size_t>(params.n_estimators));
  parallel_for(trees.size(), options.workers, [&](std::size_t t) {
    Rng rng(params.seed, "forest", t);
    std::vector<std::size_t> samples(n);
    if (params.bootstrap) {
      for (auto& s : samples) s = static_cast<std::size_t>(rng.below(n));
      std::sort(samples.begin(), samples.end());
    } else {
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    trees[t] = grow_tree(x, y, num_classes, samples, params.tree, budget, &rng);
  });
  return RandomForest(std::move(trees), num_classes, static_cast<int>(x.cols()));
}

Matrix RandomForest::predict_proba(const Matrix& x) const {
  check_columns(x);
  const auto n_trees = trees_.size();
  Matrix out(x.rows(), num_classes_);
  Matrix per_tree(static_cast<Eigen::Index>(n_trees), num_classes_);
  std::vector<double> column(n_trees);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (std::size_t t = 0; t < n_trees; ++t) {
      trees_[t].leaf_proba(x.row(i).data(), per_tree.row(static_cast<Eigen::Index>(t)).data());
    }
    for (int k = 0; k < num_classes_; ++k) {
      for (std::size_t t = 0; t < n_trees; ++t) column[t] = per_tree(static_cast<Eigen::Index>(t), k);
      out(i, k) = order_free_mean(column);
    }
  }
  return out;
}

nlohmann::json RandomForest::to_json() const {
  auto trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"format_version", kModelFormatVersion},
          {"kind", kind()},
          {"num_classes", num_classes_},
          {"num_features", num_features_},
          {"trees", std::move(trees)}};
}

RandomForest RandomForest::from_json(const nlohmann::json& j) {
  std::vector<DecisionTree> trees;
  for (const auto& t : j.at("trees")) trees.push_back(DecisionTree::from_json(t));
  return RandomForest(std::move(trees), j.at("num_classes").get<int>(),
                      j.at("num_features").get<int>());
}

}  // namespace enose
