#include "enose/selection.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <set>

using namespace enose;
using enose::testing::blobs;
using enose::testing::error_code_of;

namespace {

class ConstantModel final : public Classifier {
 public:
  ConstantModel(int classes, int features) : classes_(classes), features_(features) {}
  std::string kind() const override { return "constant"; }
  int num_classes() const override { return classes_; }
  int num_features() const override { return features_; }
  Matrix predict_proba(const Matrix& x) const override {
    Matrix p = Matrix::Zero(x.rows(), classes_);
    p.col(0).setOnes();
    return p;
  }
  nlohmann::json to_json() const override { return {{"kind", "constant"}}; }

 private:
  int classes_;
  int features_;
};

// Two thresholds combined by XOR, with unequal quadrant populations so a
// greedy root split at 0.5 is informative.
Dataset xor_quadrants(std::uint64_t seed) {
  Dataset ds;
  ds.feature_names = {"a", "b"};
  ds.classes = {"even", "odd"};
  const int counts[2][2] = {{40, 24}, {16, 8}};
  Rng rng(seed, "xor");
  std::vector<std::array<double, 2>> rows;
  for (int qa = 0; qa < 2; ++qa) {
    for (int qb = 0; qb < 2; ++qb) {
      for (int k = 0; k < counts[qa][qb]; ++k) {
        rows.push_back({0.5 * qa + rng.uniform(0.02, 0.48), 0.5 * qb + rng.uniform(0.02, 0.48)});
        ds.labels.push_back(qa ^ qb);
      }
    }
  }
  ds.features.resize(static_cast<Eigen::Index>(rows.size()), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ds.features(static_cast<Eigen::Index>(i), 0) = rows[i][0];
    ds.features(static_cast<Eigen::Index>(i), 1) = rows[i][1];
    ds.row_ids.push_back(i);
  }
  return ds;
}

}  // namespace

TEST_CASE("a constant predictor scores 1/C under cross-validation") {
  auto ds = blobs(10, 20, 3, 1.0, 1);
  const auto plan = stratified_kfold(ds.labels, 5, 3);
  const auto cv = cross_validate(
      [](const Dataset& t) { return std::make_shared<ConstantModel>(t.num_classes(), static_cast<int>(t.num_features())); },
      DatasetVersion::V1, ds, plan);
  CHECK(cv.mean == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(cv.std == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cv.val_accuracy.size() == 5);
}

TEST_CASE("validation rows never reach a fit call") {
  auto ds = blobs(3, 30, 2, 2.0, 2);
  for (auto& id : ds.row_ids) id += 1000;
  const auto plan = stratified_kfold(ds.labels, 4, 5);
  std::mutex mu;
  std::vector<std::set<std::size_t>> seen;
  std::vector<double> max_abs_mean;
  auto factory = [&](const Dataset& t) -> ClassifierPtr {
    std::lock_guard lock(mu);
    seen.emplace_back(t.row_ids.begin(), t.row_ids.end());
    // The scaler was fitted on exactly these rows.
    max_abs_mean.push_back(t.features.colwise().mean().cwiseAbs().maxCoeff());
    return fit_family(Family::DecisionTree, {{"max_depth", "3"}}, t);
  };
  cross_validate(factory, DatasetVersion::V1, ds, plan, 2);
  learning_curve(factory, DatasetVersion::V1, ds, {0.5, 1.0}, plan, 2);
  grid_search(GridSpec{Family::DecisionTree, {{"max_depth", {"2", "4"}}}, {}}, ds, plan, DatasetVersion::V1, 2,
              [&](const ParamSet&) { return ModelFactory(factory); });
  REQUIRE(seen.size() == 4 + 8 + 8);
  for (std::size_t call = 0; call < seen.size(); ++call) {
    CHECK(max_abs_mean[call] < 1e-12);
    bool inside_some_fold = false;
    for (const auto& fold : plan.folds) {
      std::set<std::size_t> train_ids, val_ids;
      for (auto p : fold.train) train_ids.insert(ds.row_ids[p]);
      for (auto p : fold.validation) val_ids.insert(ds.row_ids[p]);
      const bool subset = std::includes(train_ids.begin(), train_ids.end(), seen[call].begin(), seen[call].end());
      bool touches_val = false;
      for (auto id : seen[call]) touches_val = touches_val || val_ids.count(id) > 0;
      if (subset && !touches_val) inside_some_fold = true;
    }
    CHECK(inside_some_fold);
  }
}

TEST_CASE("cross_validate matches a hand-written fold loop") {
  auto ds = blobs(4, 25, 3, 1.2, 3);
  const auto plan = stratified_kfold(ds.labels, 5, 11);
  auto factory = family_factory(Family::Svm, {{"kernel", "rbf"}, {"C", "1"}});
  const auto cv = cross_validate(factory, DatasetVersion::V1, ds, plan, 3);
  double sum = 0.0;
  for (std::size_t f = 0; f < plan.k(); ++f) {
    const auto train = ds.subset(plan.folds[f].train);
    const auto val = ds.subset(plan.folds[f].validation);
    const auto model = fit_pipeline(train, DatasetVersion::V1, factory);
    const auto pred = argmax_rows(model.predict_proba(val));
    double hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == val.labels[i] ? 1 : 0;
    const double acc = hits / static_cast<double>(pred.size());
    CHECK(cv.val_accuracy[f] == acc);
    sum += acc;
  }
  CHECK(std::abs(cv.mean - sum / static_cast<double>(plan.k())) < 1e-15);
}

TEST_CASE("grid search selection rules") {
  auto ds = blobs(3, 20, 2, 2.0, 4);
  const auto plan = stratified_kfold(ds.labels, 3, 1);

  SUBCASE("singleton grid") {
    const GridSpec g{Family::DecisionTree, {{"max_depth", {"3"}}}, {}};
    const auto r = grid_search(g, ds, plan, DatasetVersion::V1);
    REQUIRE(r.cells.size() == 1);
    CHECK(r.best == 0);
    const auto cv = cross_validate(family_factory(Family::DecisionTree, {{"max_depth", "3"}}), DatasetVersion::V1, ds, plan);
    CHECK(r.best_cell().score == cv.mean);
  }
  SUBCASE("equal means go to the earlier cell") {
    // Unbounded depth and a bound above the tree's natural depth grow the same tree.
    const GridSpec g{Family::DecisionTree, {{"max_depth", {"none", "64"}}}, {}};
    const auto r = grid_search(g, ds, plan, DatasetVersion::V1);
    CHECK(r.cells[0].score == r.cells[1].score);
    CHECK(r.best == 0);
    const GridSpec swapped{Family::DecisionTree, {{"max_depth", {"64", "none"}}}, {}};
    CHECK(grid_search(swapped, ds, plan, DatasetVersion::V1).best == 0);
  }
  SUBCASE("best mean dominates every cell") {
    const GridSpec g{Family::DecisionTree, {{"max_depth", {"1", "2", "4"}}, {"min_samples_leaf", {"1", "10"}}}, {}};
    const auto r = grid_search(g, ds, plan, DatasetVersion::V1, 2);
    CHECK(r.cells.size() == 6);
    for (const auto& c : r.cells) CHECK(r.best_cell().score >= c.score);
    CHECK(r.cells[1].params == ParamSet{{"max_depth", "1"}, {"min_samples_leaf", "10"}});
    CHECK(r.to_json() == grid_search(g, ds, plan, DatasetVersion::V1, 1).to_json());
  }
  SUBCASE("errors") {
    CHECK(error_code_of([&] { grid_search(GridSpec{Family::DecisionTree, {}, {}}, ds, plan, DatasetVersion::V1); }) ==
          ErrorCode::EmptyGrid);
    CHECK(error_code_of([&] {
            grid_search(GridSpec{Family::DecisionTree, {{"max_depth", {}}}, {}}, ds, plan, DatasetVersion::V1);
          }) == ErrorCode::EmptyGrid);
    CHECK(error_code_of([&] { fit_family(Family::DecisionTree, {{"depth", "3"}}, ds); }) == ErrorCode::BadParameter);
    CHECK(error_code_of([&] { fit_family(Family::Svm, {{"C", "big"}}, ds); }) == ErrorCode::BadParameter);
    CHECK(error_code_of([&] { fit_family(Family::Svm, {{"kernel", "poly"}}, ds); }) == ErrorCode::BadParameter);
    CHECK(error_code_of([] { parse_family("knn"); }) == ErrorCode::BadParameter);
  }
}

TEST_CASE("depth-3 trees beat stumps on XOR quadrants") {
  const auto ds = xor_quadrants(5);
  const auto plan = stratified_kfold(ds.labels, 4, 2);
  const GridSpec g{Family::DecisionTree, {{"max_depth", {"1", "3"}}}, {}};
  const auto r = grid_search(g, ds, plan, DatasetVersion::V1);
  CHECK(r.cells[0].score <= 0.75);
  CHECK(r.cells[1].cv.train_mean == 1.0);
  CHECK(r.cells[1].score > 0.9);
  CHECK(r.best == 1);
}

TEST_CASE("linear SVM cells differing only in gamma share results") {
  auto ds = blobs(3, 15, 2, 1.5, 6);
  const auto plan = stratified_kfold(ds.labels, 3, 4);
  const GridSpec g{Family::Svm, {{"kernel", {"linear"}}, {"gamma", {"scale", "0.1"}}}, {}};
  const auto r = grid_search(g, ds, plan, DatasetVersion::V1);
  const auto direct = cross_validate(family_factory(Family::Svm, {{"kernel", "linear"}, {"gamma", "0.1"}}),
                                     DatasetVersion::V1, ds, plan);
  CHECK(r.cells[1].cv.val_accuracy == direct.val_accuracy);
  CHECK(r.cells[0].cv.val_accuracy == r.cells[1].cv.val_accuracy);
  CHECK(r.best == 0);
}

TEST_CASE("learning curves") {
  auto ds = blobs(3, 30, 2, 1.0, 7);
  const auto plan = stratified_kfold(ds.labels, 3, 8);
  auto factory = family_factory(Family::DecisionTree, {{"max_depth", "4"}});
  const auto points = learning_curve(factory, DatasetVersion::V1, ds, {0.2, 0.6, 1.0}, plan);
  REQUIRE(points.size() == 3);
  const auto cv = cross_validate(factory, DatasetVersion::V1, ds, plan);
  CHECK(points.back().val_accuracy == cv.mean);
  CHECK(points.back().train_accuracy == cv.train_mean);
  CHECK(points.back().train_size == 60.0);
  CHECK(points.front().train_size == 12.0);
  for (const auto& p : points) CHECK(p.failed_folds == 0);
  CHECK(learning_curve_csv(points).rfind("fraction,train_size,train_accuracy,val_accuracy", 0) == 0);

  CHECK(error_code_of([&] { learning_curve(factory, DatasetVersion::V1, ds, {0.5, 0.2}, plan); }) == ErrorCode::BadSizes);
  CHECK(error_code_of([&] { learning_curve(factory, DatasetVersion::V1, ds, {0.0, 0.5}, plan); }) == ErrorCode::BadSizes);
  CHECK(error_code_of([&] { learning_curve(factory, DatasetVersion::V1, ds, {0.5, 1.5}, plan); }) == ErrorCode::BadSizes);
  CHECK(error_code_of([&] { learning_curve(factory, DatasetVersion::V1, ds, {}, plan); }) == ErrorCode::BadSizes);
}

TEST_CASE("fitted pipelines round-trip and reject foreign inputs") {
  auto ds = blobs(3, 20, 4, 1.5, 9);
  const auto model = fit_pipeline(ds, DatasetVersion::V1, family_factory(Family::RandomForest, {{"n_estimators", "5"}, {"seed", "3"}}));
  const auto back = PipelineModel::from_json(model.to_json());
  CHECK(back.predict_proba(ds) == model.predict_proba(ds));
  CHECK(back.classes == ds.classes);

  auto missing = ds;
  missing.feature_names[2] = "other";
  CHECK(error_code_of([&] { model.predict_proba(missing); }) == ErrorCode::MissingColumn);
}
