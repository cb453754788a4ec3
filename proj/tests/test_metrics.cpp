#include "enose/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace enose;
using enose::testing::error_code_of;

namespace {

struct PrintedRow {
  const char* name;
  double precision;
  double recall;
  double f1;
};

// Classification report of the wider ANN on the reduced channel set.
const std::vector<PrintedRow> kAnnTable = {
    {"apple_juice", 0.9117, 0.9035, 0.9076},
    {"cardamom", 0.9900, 0.9945, 0.9923},
    {"cinnamon", 0.9945, 0.9900, 0.9922},
    {"expired_apple_juice", 0.9044, 0.9125, 0.9084},
    {"expired_garlic", 0.9450, 0.9545, 0.9498},
    {"expired_ginger", 0.9960, 0.9995, 0.9978},
    {"expired_onion", 0.8420, 0.8340, 0.8380},
    {"garlic", 0.9540, 0.9445, 0.9492},
    {"ginger", 0.9995, 0.9960, 0.9977},
    {"onion", 0.8356, 0.8435, 0.8395},
};

Confusion random_confusion(int c, Rng& rng, bool balanced) {
  Confusion m(c, c);
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = static_cast<std::int64_t>(rng.below(i == j ? 60 : 12));
  }
  if (balanced) {
    for (int i = 0; i < c; ++i) m(i, i) += 100 - m.row(i).sum();
  }
  return m;
}

}  // namespace

TEST_CASE("confusion matrix counts") {
  const std::vector<int> t = {0, 0, 1, 1};
  const std::vector<int> p = {0, 1, 1, 1};
  const auto cm = confusion_matrix(t, p, 2);
  CHECK(cm(0, 0) == 1);
  CHECK(cm(0, 1) == 1);
  CHECK(cm(1, 0) == 0);
  CHECK(cm(1, 1) == 2);

  const auto perfect = confusion_matrix(t, t, 3);
  CHECK(perfect(0, 0) == 2);
  CHECK(perfect(1, 1) == 2);
  CHECK(perfect.sum() == perfect.trace());

  Rng rng(1, "confusion");
  std::vector<int> yt(300), yp(300);
  std::vector<std::int64_t> support(5, 0);
  for (std::size_t i = 0; i < yt.size(); ++i) {
    yt[i] = static_cast<int>(rng.below(5));
    yp[i] = static_cast<int>(rng.below(5));
    ++support[static_cast<std::size_t>(yt[i])];
  }
  const auto cm5 = confusion_matrix(yt, yp, 5);
  for (int k = 0; k < 5; ++k) CHECK(cm5.row(k).sum() == support[static_cast<std::size_t>(k)]);

  CHECK(error_code_of([&] { confusion_matrix(t, std::vector<int>{0, 1, 2, 1}, 2); }) ==
        ErrorCode::LabelOutOfRange);
  CHECK(error_code_of([&] { confusion_matrix(std::vector<int>{-1}, std::vector<int>{0}, 2); }) ==
        ErrorCode::LabelOutOfRange);
}

TEST_CASE("precision, recall and F1 from a confusion matrix") {
  Confusion cm(2, 2);
  cm << 1, 1, 0, 2;
  const auto r = prf_report(cm);
  CHECK(r.per_class[0].precision == 1.0);
  CHECK(r.per_class[0].recall == 0.5);
  CHECK(r.per_class[1].precision == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(r.per_class[1].recall == 1.0);
  CHECK(r.per_class[0].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(r.per_class[1].f1 == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(r.accuracy == 0.75);
  CHECK(r.macro.precision == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(r.weighted.recall == doctest::Approx(0.75).epsilon(1e-15));

  CHECK(std::abs(f1_score(0.8418, 0.8595) - 0.8506) < 5e-5);
  CHECK(std::abs(f1_score(0.8422, 0.8595) - 0.8508) < 5e-5);
  CHECK(f1_score(0.0, 0.0) == 0.0);
}

TEST_CASE("accuracy, F1 identity and balanced averages over random matrices") {
  Rng rng(2, "prf-property");
  for (int trial = 0; trial < 100; ++trial) {
    const int c = 2 + static_cast<int>(rng.below(8));
    const bool balanced = trial % 2 == 0;
    const auto cm = random_confusion(c, rng, balanced);
    if (cm.sum() == 0) continue;
    const auto r = prf_report(cm);
    CHECK(r.accuracy == static_cast<double>(cm.trace()) / static_cast<double>(cm.sum()));
    for (const auto& m : r.per_class) {
      const double h = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
      CHECK(std::abs(m.f1 - h) < 1e-9);
      CHECK(m.precision >= 0.0);
      CHECK(m.precision <= 1.0);
    }
    if (balanced) {
      CHECK(r.macro.precision == r.weighted.precision);
      CHECK(r.macro.recall == r.weighted.recall);
      CHECK(r.macro.f1 == r.weighted.f1);
    }
  }
}

TEST_CASE("published reports are reproduced from reconstructed counts") {
  struct Case {
    const std::vector<oracle::TableRow>* rows;
    double accuracy;
    double macro_f1;
  };
  for (const auto& tc : {Case{&oracle::ensemble_table(), 0.9416, 0.9415}, Case{&oracle::forest_table(), 0.9427, 0.9427}}) {
    const auto cm = oracle::confusion_from_table(*tc.rows);
    for (Eigen::Index k = 0; k < cm.rows(); ++k) {
      CHECK(cm.row(k).sum() == 2000);
      CHECK(cm.col(k).sum() == (*tc.rows)[static_cast<std::size_t>(k)].colsum);
    }
    const auto r = prf_report(cm);
    for (std::size_t k = 0; k < tc.rows->size(); ++k) {
      const auto& row = (*tc.rows)[k];
      CAPTURE(row.name);
      CHECK(std::abs(r.per_class[k].precision - row.precision) < 5e-5);
      CHECK(std::abs(r.per_class[k].recall - row.recall) < 5e-5);
      CHECK(std::abs(r.per_class[k].f1 - row.f1) < 5e-5);
      CHECK(r.per_class[k].support == 2000);
    }
    CHECK(std::abs(r.accuracy - tc.accuracy) < 5e-5);
    CHECK(std::abs(r.macro.precision - tc.accuracy) < 5e-5);
    CHECK(std::abs(r.macro.f1 - tc.macro_f1) < 5e-5);
    CHECK(r.macro.f1 == r.weighted.f1);
  }
}

TEST_CASE("F1 column follows from the printed precision and recall") {
  // Printed P and R are themselves rounded to 4 places, so the recomputed
  // harmonic mean can sit up to about 1e-4 from the printed F1.
  for (const auto* table : {&oracle::ensemble_table(), &oracle::forest_table()}) {
    for (const auto& row : *table) {
      CAPTURE(row.name);
      CHECK(std::abs(f1_score(row.precision, row.recall) - row.f1) < 1e-4);
    }
  }
  double macro = 0.0;
  for (const auto& row : kAnnTable) {
    CAPTURE(row.name);
    CHECK(std::abs(f1_score(row.precision, row.recall) - row.f1) < 1e-4);
    macro += row.f1 / 10.0;
  }
  CHECK(std::abs(macro - 0.9372) < 1e-4);
}

TEST_CASE("zero-division conventions and flags") {
  Confusion cm(3, 3);
  cm << 2, 0, 1,
        1, 0, 1,
        0, 0, 0;
  const auto r = prf_report(cm);
  CHECK(r.per_class[1].never_predicted);
  CHECK(r.per_class[1].precision == 0.0);
  CHECK(r.per_class[1].f1 == 0.0);
  CHECK(r.per_class[2].no_support);
  CHECK(r.per_class[2].recall == 0.0);
  CHECK_FALSE(r.per_class[0].never_predicted);

  const std::vector<int> y = {0, 0, 1, 1, 2, 2};
  Matrix proba = Matrix::Zero(6, 3);
  for (int i = 0; i < 6; ++i) proba(i, i % 2 ? 2 : 0) = 1.0;
  const auto rep = evaluate_predictions(y, proba, {"a", "b", "c"});
  const auto j = rep.to_json();
  CHECK(j["degenerate_classes"] == nlohmann::json::array({"b"}));

  CHECK(error_code_of([] { prf_report(Confusion(0, 0)); }) == ErrorCode::EmptyMatrix);
  CHECK(error_code_of([] { prf_report(Confusion::Zero(3, 3)); }) == ErrorCode::EmptyMatrix);
}

TEST_CASE("ROC examples") {
  const std::vector<int> pos = {1, 0, 1, 0};
  const std::vector<double> s = {0.9, 0.8, 0.4, 0.2};
  const auto c = roc_curve(pos, s);
  CHECK(c.auc == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(std::isinf(c.thresholds.front()));
  CHECK(c.fpr.back() == 1.0);
  CHECK(c.tpr.back() == 1.0);

  CHECK(roc_curve(pos, std::vector<double>{0.9, 0.1, 0.8, 0.2}).auc == 1.0);
  CHECK(roc_curve(pos, std::vector<double>{0.3, 0.3, 0.3, 0.3}).auc == 0.5);
  CHECK_FALSE(roc_curve(std::vector<int>{1, 1}, std::vector<double>{0.2, 0.4}).defined);
}

TEST_CASE("trapezoidal AUC equals the pairwise-comparison AUC") {
  Rng rng(3, "auc-oracle");
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 5 + rng.below(80);
    std::vector<int> pos(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      pos[i] = static_cast<int>(rng.below(2));
      // Coarse scores force ties.
      s[i] = static_cast<double>(rng.below(trial % 3 == 0 ? 4 : 1000)) / 10.0;
    }
    pos[0] = 1;
    pos[1] = 0;
    CHECK(std::abs(roc_curve(pos, s).auc - oracle::pairwise_auc(pos, s)) < 1e-12);
  }
}

TEST_CASE("perfect and uniform classifiers") {
  const int c = 4;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) y.push_back(i % c);
  Matrix perfect = Matrix::Zero(40, c);
  for (int i = 0; i < 40; ++i) perfect(i, y[static_cast<std::size_t>(i)]) = 1.0;
  const auto rp = roc_auc(y, perfect);
  CHECK(rp.micro_auc == 1.0);
  CHECK(rp.macro_auc == 1.0);

  const Matrix uniform = Matrix::Constant(40, c, 1.0 / c);
  const auto ru = roc_auc(y, uniform);
  CHECK(std::abs(ru.micro_auc - 0.5) < 1e-9);
  CHECK(std::abs(ru.macro_auc - 0.5) < 1e-9);

  // A class absent from y_true is excluded from the macro mean.
  std::vector<int> y3 = {0, 1, 0, 1};
  Matrix p3(4, 3);
  p3 << 0.8, 0.1, 0.1,
        0.1, 0.8, 0.1,
        0.7, 0.2, 0.1,
        0.2, 0.7, 0.1;
  const auto r3 = roc_auc(y3, p3);
  CHECK_FALSE(r3.per_class[2].defined);
  CHECK(r3.macro_auc == 1.0);
}

TEST_CASE("report serializations") {
  const std::vector<int> y = {0, 1, 1, 0};
  Matrix proba(4, 2);
  proba << 0.9, 0.1,
           0.2, 0.8,
           0.6, 0.4,
           0.3, 0.7;
  const auto rep = evaluate_predictions(y, proba, {"x", "y"});
  CHECK(rep.classification_csv() ==
        "class,precision,recall,f1-score,support\n"
        "x,0.5000,0.5000,0.5000,2\n"
        "y,0.5000,0.5000,0.5000,2\n"
        "accuracy,,,0.5000,4\n"
        "macro avg,0.5000,0.5000,0.5000,4\n"
        "weighted avg,0.5000,0.5000,0.5000,4\n");
  CHECK(rep.confusion_csv() == "true\\predicted,x,y\nx,1,1\ny,1,1\n");
  CHECK(rep.roc_csv().rfind("curve,fpr,tpr,threshold\nx,0,0,inf\n", 0) == 0);
  CHECK(rep.to_json()["accuracy"] == 0.5);
  CHECK(error_code_of([&] { evaluate_predictions(y, proba, {"x", "y", "z"}); }) == ErrorCode::ClassTableMismatch);
}
