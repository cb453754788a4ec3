#include "enose/dataset.hpp"
#include "enose/preprocess.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

using namespace enose;
using enose::testing::error_code_of;
using enose::testing::TempDir;

namespace {

const char* kHeader = "co,no2,voc,ethanol,co2,tvoc,temperature,humidity,pressure";

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

Labels balanced(int classes, int per_class) {
  Labels y;
  for (int c = 0; c < classes; ++c) y.insert(y.end(), per_class, c);
  return y;
}

}  // namespace

TEST_CASE("parse_run_csv reads header order and label") {
  const std::string text = std::string(kHeader) + "\n1,2,3,4,5,6,7,8,9\n9,8,7,6,5,4,3,2,1\n";
  const auto run = parse_run_csv(text, "onion");
  CHECK(run.rows.rows() == 2);
  CHECK(run.rows.cols() == 9);
  CHECK(run.label == "onion");
  CHECK(run.feature_names == canonical_channels());
  CHECK(run.rows(1, 0) == 9.0);
}

TEST_CASE("parse_run_csv accepts CRLF line endings") {
  const auto run = parse_run_csv("a,b\r\n1.5,2\r\n3,4e-1\r\n", "x");
  CHECK(run.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(run.rows(0, 0) == 1.5);
  CHECK(run.rows(1, 1) == doctest::Approx(0.4));
}

TEST_CASE("parse_run_csv errors") {
  CHECK(error_code_of([] { parse_run_csv(std::string(kHeader) + "\n", "garlic"); }) == ErrorCode::EmptyRun);
  try {
    parse_run_csv("a,b,c,d\n1,2,abc,4\n", "x");
    FAIL("no throw");
  } catch (const MalformedCellError& e) {
    CHECK(e.row() == 1);
    CHECK(e.col() == 3);
  }
  CHECK(error_code_of([] { parse_run_csv("a,b\n1,inf\n", "x"); }) == ErrorCode::MalformedCell);
  CHECK(error_code_of([] { parse_run_csv("a,b\n1,nan\n", "x"); }) == ErrorCode::MalformedCell);
  try {
    parse_run_csv("a,b\n1,2\n3\n", "x");
    FAIL("no throw");
  } catch (const RaggedRowError& e) {
    CHECK(e.row() == 2);
  }
}

TEST_CASE("target column is removed and must agree with the label") {
  const auto run = parse_run_csv("a,target,b\n1,onion,2\n3,onion,4\n", "");
  CHECK(run.label == "onion");
  CHECK(run.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(run.rows(1, 1) == 4.0);
  CHECK(error_code_of([] { parse_run_csv("a,target\n1,onion\n", "garlic"); }) == ErrorCode::LabelConflict);
  CHECK(error_code_of([] { parse_run_csv("a,target\n1,onion\n2,garlic\n", ""); }) == ErrorCode::LabelConflict);
}

TEST_CASE("merge_runs concatenates and encodes sorted classes") {
  auto a = parse_run_csv("x,y\n1,1\n2,2\n", "onion");
  auto b = parse_run_csv("x,y\n3,3\n4,4\n5,5\n", "garlic");
  const auto ds = merge_runs({a, b});
  CHECK(ds.size() == 5);
  CHECK(ds.classes == std::vector<std::string>{"garlic", "onion"});
  CHECK(ds.labels == Labels{1, 1, 0, 0, 0});
  CHECK(ds.features(2, 0) == 3.0);
  ds.validate();

  auto c = parse_run_csv("x,z\n1,1\n", "ginger");
  CHECK(error_code_of([&] { merge_runs({a, c}); }) == ErrorCode::SchemaMismatch);
  CHECK(error_code_of([] { merge_runs({}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("label_from_filename") {
  CHECK(label_from_filename("expired_onion__run3.csv") == "expired_onion");
  CHECK(label_from_filename("/a/b/garlic__7.csv") == "garlic");
  CHECK(label_from_filename("garlic.csv").empty());
}

TEST_CASE("manifest and directory loading") {
  TempDir dir("dataset");
  write(dir.path() / "onion__1.csv", "x,y\n1,2\n3,4\n");
  write(dir.path() / "garlic__1.csv", "x,y\n5,6\n");
  write(dir.path() / "manifest.csv", "# path,class\n\nonion__1.csv,onion\ngarlic__1.csv,garlic\n");
  const auto m = load_manifest(dir.path() / "manifest.csv");
  CHECK(m.size() == 3);
  CHECK(m.labels == Labels{1, 1, 0});
  const auto d = load_directory(dir.path());
  CHECK(d.size() == 3);
  CHECK(d.labels == Labels{0, 1, 1});  // garlic__1.csv sorts first

  write(dir.path() / "empty.csv", "# nothing\n");
  CHECK(error_code_of([&] { load_manifest(dir.path() / "empty.csv"); }) == ErrorCode::EmptyInput);
  write(dir.path() / "missing.csv", "nope__1.csv,nope\n");
  try {
    load_manifest(dir.path() / "missing.csv");
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("nope__1.csv") != std::string::npos);
  }
}

TEST_CASE("stratified split counts per class") {
  Dataset ds;
  ds.feature_names = {"x"};
  ds.classes = {"a", "b"};
  ds.labels = balanced(2, 5);
  ds.features = Matrix::Zero(10, 1);
  for (int i = 0; i < 10; ++i) ds.row_ids.push_back(static_cast<std::size_t>(i));
  const auto [train, test] = stratified_split(ds, 0.2, 3);
  CHECK(test.class_counts() == std::vector<std::size_t>{1, 1});
  CHECK(train.size() == 8);

  const Labels big = balanced(10, 10000);
  const auto idx = stratified_split_indices(big, 10, 0.2, 11);
  std::vector<std::size_t> per(10, 0);
  for (auto i : idx.test) ++per[static_cast<std::size_t>(big[i])];
  for (auto c : per) CHECK(c == 2000);
}

TEST_CASE("stratified split partitions indices and is deterministic") {
  Labels y;
  for (int i = 0; i < 97; ++i) y.push_back(i % 3 == 0 ? 0 : (i % 3 == 1 ? 1 : 2));
  y.push_back(0);
  const auto a = stratified_split_indices(y, 3, 0.3, 5);
  const auto b = stratified_split_indices(y, 3, 0.3, 5);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  std::vector<std::size_t> all = a.train;
  all.insert(all.end(), a.test.begin(), a.test.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(y.size());
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(all == expect);
  CHECK(std::is_sorted(a.test.begin(), a.test.end()));
  for (int c = 0; c < 3; ++c) {
    const auto n = std::count(y.begin(), y.end(), c);
    const auto t = std::count_if(a.test.begin(), a.test.end(), [&](std::size_t i) { return y[i] == c; });
    CHECK(t == static_cast<long>(std::floor(static_cast<double>(n) * 0.3 + 0.5)));
  }
  const auto other = stratified_split_indices(y, 3, 0.3, 6);
  CHECK(other.test != a.test);
}

TEST_CASE("stratified split errors") {
  const Labels y = balanced(2, 5);
  CHECK(error_code_of([&] { stratified_split_indices(y, 2, 1.0, 1); }) == ErrorCode::InvalidFraction);
  CHECK(error_code_of([&] { stratified_split_indices(y, 2, 0.0, 1); }) == ErrorCode::InvalidFraction);
  CHECK(error_code_of([] { stratified_split_indices(Labels{0, 1, 1}, 2, 0.5, 1); }) == ErrorCode::ClassTooSmall);
}

TEST_CASE("stratified kfold partitions and balances") {
  const Labels y = balanced(10, 10);
  const auto plan = stratified_kfold(y, 5, 9);
  REQUIRE(plan.k() == 5);
  std::vector<int> seen(y.size(), 0);
  for (const auto& f : plan.folds) {
    std::vector<int> per(10, 0);
    for (auto i : f.validation) {
      ++seen[i];
      ++per[static_cast<std::size_t>(y[i])];
    }
    for (int c : per) CHECK(c == 2);
    CHECK(f.train.size() + f.validation.size() == y.size());
    std::set<std::size_t> val(f.validation.begin(), f.validation.end());
    for (auto i : f.train) CHECK(val.count(i) == 0);
  }
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("kfold balance property on uneven classes") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed, "test-kfold");
    const int classes = 2 + static_cast<int>(rng.below(4));
    const int k = 2 + static_cast<int>(rng.below(4));
    Labels y;
    std::vector<int> n(static_cast<std::size_t>(classes));
    for (int c = 0; c < classes; ++c) {
      n[static_cast<std::size_t>(c)] = k + static_cast<int>(rng.below(17));
      y.insert(y.end(), n[static_cast<std::size_t>(c)], c);
    }
    Rng shuffler(seed, "test-kfold-order");
    shuffler.shuffle(std::span<int>(y));
    const auto plan = stratified_kfold(y, k, seed);
    std::vector<int> seen(y.size(), 0);
    for (const auto& f : plan.folds) {
      std::vector<int> per(static_cast<std::size_t>(classes), 0);
      for (auto i : f.validation) {
        ++seen[i];
        ++per[static_cast<std::size_t>(y[i])];
      }
      for (int c = 0; c < classes; ++c) {
        CHECK(std::abs(per[static_cast<std::size_t>(c)] - static_cast<double>(n[static_cast<std::size_t>(c)]) / k) <
              1.0);
      }
    }
    for (int s : seen) CHECK(s == 1);
  }
}

TEST_CASE("stratified kfold errors") {
  CHECK(error_code_of([] { stratified_kfold(balanced(2, 10), 1, 0); }) == ErrorCode::BadK);
  Labels y = balanced(2, 10);
  y.insert(y.end(), 3, 2);
  CHECK(error_code_of([&] { stratified_kfold(y, 5, 0); }) == ErrorCode::TooFewPerClass);
}

TEST_CASE("dataset_to_csv writes one row per sample with the class name") {
  const auto ds = enose::testing::blobs(3, 4, 2, 2.0, 1);
  const auto text = dataset_to_csv(ds);
  CHECK(text.rfind("f0,f1,target\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 13);
  // A single class block parses back exactly through the run parser.
  const auto first_block_end = [&] {
    std::size_t pos = 0;
    for (int line = 0; line < 5; ++line) pos = text.find('\n', pos) + 1;
    return pos;
  }();
  const auto run = parse_run_csv(text.substr(0, first_block_end), "");
  CHECK(run.label == "c0");
  for (int i = 0; i < 4; ++i) {
    CHECK(run.rows(i, 0) == ds.features(i, 0));
    CHECK(run.rows(i, 1) == ds.features(i, 1));
  }
}
