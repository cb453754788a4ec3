#pragma once

#include "enose/classifier.hpp"
#include "enose/dataset.hpp"
#include "enose/preprocess.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace enose {

enum class Family { Svm, DecisionTree, RandomForest, Mlp };

std::string_view to_string(Family f);
Family parse_family(std::string_view name);

/// Named hyperparameters in declaration order, values kept as text
/// ("rbf", "0.1", "none", "scale") so grids round-trip through config
/// files and reports unchanged.
using ParamSet = std::vector<std::pair<std::string, std::string>>;

std::string format_params(const ParamSet& params);
nlohmann::json params_to_json(const ParamSet& params);

/// Fits one classifier of `family` on already transformed features.
/// Unknown parameter names or unparsable values throw BadParameter.
ClassifierPtr fit_family(Family family, const ParamSet& params, const Dataset& train,
                         const FitOptions& options = {});

/// Receives the transformed training fold (row_ids intact) and returns a
/// fitted model.
using ModelFactory = std::function<ClassifierPtr(const Dataset& train)>;

ModelFactory family_factory(Family family, ParamSet params, FitOptions options = {});

/// Soft-vote ensemble over members fitted from the given configurations.
ModelFactory ensemble_factory(std::vector<std::pair<Family, ParamSet>> members,
                              FitOptions options = {});

/// Raw features -> drop columns -> standardize -> optional reducer -> model.
struct PipelineModel {
  std::vector<std::string> input_features;
  std::vector<std::string> classes;
  VersionSpec version;
  Scaler scaler;
  ClassifierPtr model;

  /// Applies every fitted transform; throws MissingColumn when `raw`
  /// lacks an input feature.
  Dataset transform(const Dataset& raw) const;
  Matrix predict_proba(const Dataset& raw) const;

  nlohmann::json to_json() const;
  static PipelineModel from_json(const nlohmann::json& j);
};

/// Fits drop/standardize/reduce on `train` and leaves `model` empty.
PipelineModel fit_transforms(const Dataset& train, DatasetVersion version);

/// Fits the transforms on `train` only, then the model on the result.
PipelineModel fit_pipeline(const Dataset& train, DatasetVersion version, const ModelFactory& factory);

struct CvResult {
  std::vector<double> val_accuracy;
  std::vector<double> train_accuracy;
  std::vector<bool> failed;
  std::vector<std::string> errors;
  /// Over successful folds; -infinity when every fold failed.
  double mean = 0.0;
  /// Population standard deviation over successful folds.
  double std = 0.0;
  double train_mean = 0.0;
  /// False when any fold's model stopped on an iteration budget.
  bool converged = true;

  bool any_failed() const;
  nlohmann::json to_json() const;
};

/// Full-pipeline k-fold CV: every fold refits the scaler and reducer on its
/// training indices, so validation rows never reach a fit call.
CvResult cross_validate(const ModelFactory& factory, DatasetVersion version, const Dataset& ds,
                        const FoldPlan& plan, std::size_t workers = 1);

struct GridSpec {
  Family family = Family::Svm;
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  /// Parameters held fixed in every cell (e.g. a forest seed).
  ParamSet fixed;

  /// Cartesian product, last axis varying fastest. Throws EmptyGrid.
  std::vector<ParamSet> cells() const;
};

struct GridCell {
  ParamSet params;
  CvResult cv;
  /// CV mean, or -infinity for failed / non-converged cells.
  double score = 0.0;
};

struct GridResult {
  Family family = Family::Svm;
  std::vector<GridCell> cells;
  std::size_t best = 0;

  const GridCell& best_cell() const { return cells.at(best); }
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Builds a model factory for each cell's parameters.
using FactoryMaker = std::function<ModelFactory(const ParamSet& params)>;

/// Evaluates every (cell, fold) unit concurrently; results are reduced by
/// index so the outcome does not depend on `workers`. Best = highest score,
/// earliest cell on ties. Linear-kernel SVM cells that differ only in
/// gamma are fitted once and share their fold results.
GridResult grid_search(const GridSpec& spec, const Dataset& ds, const FoldPlan& plan,
                       DatasetVersion version, std::size_t workers = 1,
                       const FactoryMaker& maker = {});

struct LearningPoint {
  double fraction = 0.0;
  double train_size = 0.0;  // mean subset size over folds
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  std::size_t failed_folds = 0;
};

/// For each size s, each fold trains on ceil(s * n_c) rows per class taken
/// from a seeded permutation of that fold's class members (kept in
/// ascending index order), so s = 1 reproduces plain cross-validation.
std::vector<LearningPoint> learning_curve(const ModelFactory& factory, DatasetVersion version,
                                          const Dataset& ds, const std::vector<double>& sizes,
                                          const FoldPlan& plan, std::size_t workers = 1);

std::string learning_curve_csv(const std::vector<LearningPoint>& points);

}  // namespace enose
