#include "enose/config.hpp"
#include "test_util.hpp"

#include <fstream>

using namespace enose;
using enose::testing::error_code_of;

namespace {

const char* kMinimal = R"([data]
source = synth

[split]
test_fraction = 0.25
seed = 3
folds = 4

[pipeline]
version = V3

[output]
dir = results
)";

std::string message_of(const std::string& text) {
  try {
    parse_config(text, "t.ini");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    return e.what();
  }
  FAIL("config was accepted");
  return {};
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("minimal config takes defaults for optional sections") {
  const auto c = parse_config(kMinimal);
  CHECK(c.test_fraction == 0.25);
  CHECK(c.split_seed == 3);
  CHECK(c.folds == 4);
  CHECK(c.version == DatasetVersion::V3);
  CHECK(c.out_dir == "results");
  CHECK(c.data.samples_per_class == 1000);
  CHECK(c.families.size() == 3);
  CHECK(c.ann_variants.size() == 5);
  CHECK(c.grids.at(Family::RandomForest).axes == default_grid(Family::RandomForest).axes);
  CHECK(c.formats == std::set<std::string>{"json", "csv"});
}

TEST_CASE("full config with grids and lists") {
  const auto c = parse_config(std::string(kMinimal) + R"(
[models]
families = svm, rf
baseline_versions = V1, V2
ensemble = svm, rf
ann_variants = wider
ann_epochs = 3
learning_curve_sizes = 0.25, 1

[grid.rf]
n_estimators = 10, 20
max_features = sqrt
)");
  CHECK(c.families == std::vector<Family>{Family::Svm, Family::RandomForest});
  CHECK(c.ann_variants == std::vector<std::string>{"wider"});
  CHECK(c.learning_curve_sizes == std::vector<double>{0.25, 1.0});
  const auto& g = c.grids.at(Family::RandomForest);
  CHECK(g.cells().size() == 2);
  CHECK(g.axes[0].second == std::vector<std::string>{"10", "20"});
}

TEST_CASE("errors name the offending key") {
  CHECK(contains(message_of("[data]\nsource = synth\n"), "[split] test_fraction: missing required key"));
  CHECK(contains(message_of(std::string(kMinimal) + "[split2]\nx = 1\n"), "unknown section [split2]"));
  CHECK(contains(message_of(std::string(kMinimal) + "[models]\nepochs = 3\n"), "epochs"));
  std::string bad_version = kMinimal;
  bad_version.replace(bad_version.find("V3"), 2, "V9");
  CHECK(contains(message_of(bad_version), "[pipeline] version"));
  std::string bad_fraction = kMinimal;
  bad_fraction.replace(bad_fraction.find("0.25"), 4, "1.5");
  CHECK(contains(message_of(bad_fraction), "test_fraction"));
  CHECK(contains(message_of(std::string(kMinimal) + "[models]\nlearning_curve_sizes = 0.5, 0.2\n"),
                 "learning_curve_sizes"));
  CHECK(contains(message_of(std::string(kMinimal) + "[models]\nann_variants = shallow\n"), "ann_variants"));
  CHECK(contains(message_of(std::string(kMinimal) + "[grid.knn]\nk = 3\n"), "grid.knn"));
  CHECK(contains(message_of(std::string(kMinimal) + "[models]\nfamilies = svm, dt\nensemble = svm, rf\n"),
                 "ensemble"));
  CHECK(error_code_of([] { load_config("/nonexistent/enose.ini"); }) == ErrorCode::Config);
}

TEST_CASE("resolved config round-trips through INI") {
  auto c = parse_config(std::string(kMinimal) + "[grid.svm]\nkernel = rbf\nC = 1, 10\n");
  const auto text = c.to_ini();
  const auto back = parse_config(text);
  CHECK(back.to_ini() == text);
  CHECK(back.grids.at(Family::Svm).axes == c.grids.at(Family::Svm).axes);
  c.workers = 8;
  CHECK(c.to_ini() == text);
  CHECK(default_config().to_ini() == parse_config(default_config().to_ini()).to_ini());
}

TEST_CASE("relative data paths resolve against the config file") {
  enose::testing::TempDir dir("config");
  const auto path = dir.path() / "run.ini";
  {
    std::ofstream f(path);
    std::string text = kMinimal;
    text.replace(text.find("source = synth"), 14, "source = manifest\nmanifest = runs/manifest.csv");
    f << text;
  }
  const auto c = load_config(path);
  CHECK(c.data.manifest == dir.path() / "runs/manifest.csv");
}
