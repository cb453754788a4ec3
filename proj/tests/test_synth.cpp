#include "enose/dataset.hpp"
#include "enose/preprocess.hpp"
#include "enose/synth.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

using namespace enose;
using enose::testing::error_code_of;
using enose::testing::TempDir;

namespace {

// Reference Pearson r, written out with two-pass sums.
double reference_pearson(const Eigen::VectorXd& a, const std::vector<int>& labels) {
  const double n = static_cast<double>(labels.size());
  double mb = 0.0;
  for (int v : labels) mb += v;
  mb /= n;
  const double ma = a.mean();
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double da = a[static_cast<Eigen::Index>(i)] - ma;
    const double db = labels[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return sab / std::sqrt(saa * sbb);
}

Eigen::Index column_of(const Dataset& ds, const std::string& name) {
  const auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(), name);
  REQUIRE(it != ds.feature_names.end());
  return it - ds.feature_names.begin();
}

std::string base_substance(const std::string& cls) {
  const std::string prefix = "expired_";
  return cls.rfind(prefix, 0) == 0 ? cls.substr(prefix.size()) : cls;
}

/// Second-largest per-channel gap |mu_a - mu_b| / max(sigma_a, sigma_b).
double second_largest_gap(const SynthSpec& s, int a, int b) {
  std::vector<double> gaps;
  for (Eigen::Index j = 0; j < s.means.cols(); ++j) {
    gaps.push_back(std::abs(s.means(a, j) - s.means(b, j)) / std::max(s.stds(a, j), s.stds(b, j)));
  }
  std::sort(gaps.rbegin(), gaps.rend());
  return gaps.at(1);
}

}  // namespace

TEST_CASE("sample counts, schema and block order") {
  const auto ds = generate(default_spec(100));
  CHECK(ds.size() == 1000);
  for (auto c : ds.class_counts()) CHECK(c == 100);
  CHECK(ds.feature_names == canonical_channels());
  CHECK(ds.classes == std::vector<std::string>{"apple_juice", "cardamom", "cinnamon", "expired_apple_juice",
                                               "expired_garlic", "expired_ginger", "expired_onion", "garlic",
                                               "ginger", "onion"});
  CHECK(std::is_sorted(ds.labels.begin(), ds.labels.end()));
  ds.validate();
}

TEST_CASE("generation is deterministic and independent of workers") {
  const auto spec = default_spec(50);
  const auto a = dataset_to_csv(generate(spec));
  CHECK(dataset_to_csv(generate(spec)) == a);
  CHECK(dataset_to_csv(generate(spec, std::nullopt, 4)) == a);
  CHECK(dataset_to_csv(generate(spec, std::uint64_t{7})) != a);

  // Scaling the class size leaves the gas readings of earlier rows in the
  // first block unchanged; ambient values sit on a session-length ramp.
  const auto small = generate(default_spec(10));
  const auto large = generate(default_spec(20));
  for (const auto& g : default_spec(10).gas_channels) {
    const auto j = column_of(small, g);
    CHECK(small.features.col(j).head(10) == large.features.col(j).head(10));
  }
}

TEST_CASE("drifted session ranks pressure first and temperature last") {
  const auto ds = generate(default_spec(1000));
  const auto ranking = feature_target_correlation(ds);
  CHECK(ranking.front().feature == "pressure");
  CHECK(ranking.back().feature == "temperature");
  for (const auto& fc : ranking) {
    const Eigen::VectorXd col = ds.features.col(column_of(ds, fc.feature));
    CHECK(std::abs(fc.r - reference_pearson(col, ds.labels)) < 1e-12);
  }
  CHECK(ranking.front().r > 0.0);
  CHECK(ranking.back().r < 0.0);
}

TEST_CASE("without drift the ambient channels carry no label signal") {
  auto spec = default_spec(1000);
  spec.drift.enabled = false;
  const auto ds = generate(spec);
  for (const char* name : {"temperature", "pressure"}) {
    const Eigen::VectorXd col = ds.features.col(column_of(ds, name));
    CAPTURE(name);
    CHECK(std::abs(reference_pearson(col, ds.labels)) < 0.05);
  }
}

TEST_CASE("per-class gas means converge to the configured means") {
  const int n = 2000;
  const auto spec = default_spec(n);
  const auto ds = generate(spec);
  for (int c = 0; c < spec.means.rows(); ++c) {
    for (Eigen::Index g = 0; g < spec.means.cols(); ++g) {
      const auto col = column_of(ds, spec.gas_channels[static_cast<std::size_t>(g)]);
      const double mean = ds.features.block(c * n, col, n, 1).mean();
      CHECK(std::abs(mean - spec.means(c, g)) < 4.0 * spec.stds(c, g) / std::sqrt(n));
    }
  }
}

TEST_CASE("default profiles meet the separation floors") {
  const auto spec = default_spec(10);
  const auto c = static_cast<int>(spec.classes.size());
  for (int a = 0; a < c; ++a) {
    for (int b = a + 1; b < c; ++b) {
      const auto& na = spec.classes[static_cast<std::size_t>(a)];
      const auto& nb = spec.classes[static_cast<std::size_t>(b)];
      CAPTURE(na);
      CAPTURE(nb);
      const double gap = second_largest_gap(spec, a, b);
      CHECK(std::abs(gap - pair_separation(spec, a, b)) < 1e-12);
      CHECK(gap >= (base_substance(na) == base_substance(nb) ? 3.0 : 5.0));
    }
  }
}

TEST_CASE("spec validation") {
  auto bad_sigma = default_spec(10);
  bad_sigma.stds(2, 1) = 0.0;
  CHECK(error_code_of([&] { bad_sigma.validate(); }) == ErrorCode::BadSpec);
  auto bad_ramp = default_spec(10);
  bad_ramp.drift.pressure.end = std::nan("");
  CHECK(error_code_of([&] { generate(bad_ramp); }) == ErrorCode::BadSpec);
  auto bad_count = default_spec(10);
  bad_count.samples_per_class = 0;
  CHECK(error_code_of([&] { generate(bad_count); }) == ErrorCode::BadSpec);
  auto no_ambient = default_spec(10);
  no_ambient.channels.pop_back();
  CHECK(error_code_of([&] { no_ambient.validate(); }) == ErrorCode::BadSpec);
}

TEST_CASE("run files load back into the same dataset") {
  TempDir dir("synth_runs");
  const auto ds = generate(default_spec(30));
  const auto out = write_runs(ds, dir.path());
  CHECK(out.files.size() == 10);
  const auto back = load_manifest(out.manifest);
  CHECK(back.classes == ds.classes);
  CHECK(back.labels == ds.labels);
  CHECK(back.features == ds.features);
  CHECK(load_directory(dir.path()).features == ds.features);
}

TEST_CASE("profile tables") {
  TempDir dir("profiles");
  const auto path = dir.path() / "profiles.csv";
  {
    std::ofstream f(path);
    f << "class,stat,co,voc\n"
         "b,mean,5,1\n"
         "a,mean,1,1\n"
         "a,std,0.5,0.5\n"
         "b,std,1,1\n";
  }
  auto spec = default_spec(10);
  load_profiles(spec, path);
  CHECK(spec.classes == std::vector<std::string>{"a", "b"});
  CHECK(spec.means(1, 0) == 5.0);
  CHECK(spec.stds(0, 1) == 0.5);
  const auto ds = generate(spec);
  CHECK(ds.feature_names == std::vector<std::string>{"co", "voc", "temperature", "pressure"});

  {
    std::ofstream f(path);
    f << "class,stat,co\na,median,1\n";
  }
  CHECK(error_code_of([&] { load_profiles(spec, path); }) == ErrorCode::BadSpec);
  {
    std::ofstream f(path);
    f << "class,stat,co\na,mean,1\n";
  }
  CHECK(error_code_of([&] { load_profiles(spec, path); }) == ErrorCode::BadSpec);
}
