#pragma once

#include "enose/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace enose {

inline const std::vector<std::string>& canonical_channels() {
  static const std::vector<std::string> names = {
      "co", "no2", "voc", "ethanol", "co2", "tvoc", "temperature", "humidity", "pressure"};
  return names;
}

/// One recorded run: a header, its numeric rows, and the class it belongs to.
struct RunTable {
  std::vector<std::string> feature_names;
  Matrix rows;
  std::string label;
};

/// Labeled feature matrix shared by every stage of the pipeline.
/// `row_ids` tracks the originating row of the master dataset through
/// subsetting so that fold hygiene can be audited.
struct Dataset {
  std::vector<std::string> feature_names;
  Matrix features;
  Labels labels;
  std::vector<std::string> classes;
  std::vector<std::size_t> row_ids;

  std::size_t size() const { return labels.size(); }
  std::size_t num_features() const { return feature_names.size(); }
  int num_classes() const { return static_cast<int>(classes.size()); }

  /// Per-class sample counts, length C.
  std::vector<std::size_t> class_counts() const;

  /// Rows at `indices` (in that order); class table is kept as is.
  Dataset subset(std::span<const std::size_t> indices) const;

  /// Same rows and labels with different features.
  Dataset with_features(std::vector<std::string> names, Matrix x) const;

  /// Throws if the Dataset invariants do not hold.
  void validate() const;
};

struct FoldPlan {
  struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
  };
  std::vector<Fold> folds;
  std::uint64_t seed = 0;

  std::size_t k() const { return folds.size(); }
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Parses one run file. If a `target` column is present it is removed from
/// the features; every row must carry the same value, and it must agree
/// with `label` when `label` is non-empty.
RunTable parse_run_csv(std::string_view text, const std::string& label);

/// Concatenates runs in input order; classes are the sorted unique labels.
Dataset merge_runs(const std::vector<RunTable>& tables);

/// `<class>__<run_id>.csv` -> `<class>`; empty if the name does not match.
std::string label_from_filename(const std::filesystem::path& path);

struct ManifestEntry {
  std::filesystem::path path;
  std::string label;
};

/// Lines of `<path>,<class_name>`. Relative paths resolve against the
/// manifest's directory. Blank lines and `#` comments are skipped.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest);

RunTable read_run_file(const std::filesystem::path& path, const std::string& label = {});

/// Reads every run named by the manifest and merges them.
Dataset load_manifest(const std::filesystem::path& manifest);

/// Reads every `<class>__<run>.csv` in a directory (sorted by filename).
Dataset load_directory(const std::filesystem::path& dir);

/// Writes features plus a trailing `target` column with class names.
std::string dataset_to_csv(const Dataset& ds);

/// Per-class seeded split; per class c the test side receives
/// round-half-up(n_c * test_fraction) samples. Index lists are ascending.
SplitIndices stratified_split_indices(const Labels& labels, int num_classes,
                                      double test_fraction, std::uint64_t seed);

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed);

FoldPlan stratified_kfold(const Labels& labels, int k, std::uint64_t seed);

}  // namespace enose
