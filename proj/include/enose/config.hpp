#pragma once

#include "enose/preprocess.hpp"
#include "enose/selection.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace enose {

struct DataConfig {
  /// "synth", "manifest" or "directory".
  std::string source = "synth";
  std::filesystem::path manifest;
  std::filesystem::path directory;
  std::filesystem::path profiles;
  int samples_per_class = 1000;
  bool drift = true;
  std::uint64_t seed = 42;
};

/// Everything `run` needs. Parsed from an INI file (see README for the
/// grammar); command-line flags are applied on top.
struct PipelineConfig {
  DataConfig data;

  double test_fraction = 0.2;
  std::uint64_t split_seed = 7;
  int folds = 5;

  DatasetVersion version = DatasetVersion::V2;
  std::size_t workers = 1;

  std::vector<Family> families{Family::Svm, Family::DecisionTree, Family::RandomForest};
  std::vector<DatasetVersion> baseline_versions{DatasetVersion::V1, DatasetVersion::V2, DatasetVersion::V3,
                                                DatasetVersion::V4};
  std::vector<Family> ensemble{Family::Svm, Family::DecisionTree, Family::RandomForest};
  std::vector<std::string> ann_variants{"baseline", "deeper", "wider", "l2", "rmsprop"};
  std::vector<DatasetVersion> ann_versions{DatasetVersion::V1, DatasetVersion::V2};
  int ann_epochs = 50;
  int ann_batch = 128;
  double ann_validation_fraction = 0.2;
  std::vector<double> learning_curve_sizes{0.1, 0.325, 0.55, 0.775, 1.0};
  bool learning_curves = true;
  std::uint64_t model_seed = 0;

  /// Tuning grid per family; defaults come from `default_grid`.
  std::map<Family, GridSpec> grids;

  std::filesystem::path out_dir = "enose_out";
  std::set<std::string> formats{"json", "csv"};

  /// Throws Config naming the offending key.
  void validate() const;
  /// Resolved configuration in the same INI grammar. The worker count is
  /// left out: it never changes results, and bundles stay byte-identical.
  std::string to_ini() const;
};

/// Hyperparameter grid used when the config has no [grid.<family>] section.
GridSpec default_grid(Family family);

PipelineConfig default_config();

/// Parses INI text. Every key of [data], [split], [pipeline] and [output]
/// listed as required must be present; unknown sections and keys are
/// rejected so typos do not pass silently. `origin` labels error messages.
PipelineConfig parse_config(const std::string& text, const std::string& origin = "config");
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace enose
