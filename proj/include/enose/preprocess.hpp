#pragma once

#include "enose/dataset.hpp"
#include "enose/reduce.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace enose {

/// Lexicographically ordered class table; a name's position is its code.
class LabelEncoder {
 public:
  LabelEncoder() = default;
  explicit LabelEncoder(std::vector<std::string> names);

  const std::vector<std::string>& classes() const { return classes_; }
  int encode(const std::string& name) const;
  const std::string& decode(int index) const;
  int size() const { return static_cast<int>(classes_.size()); }

 private:
  std::vector<std::string> classes_;
};

LabelEncoder encode_labels(const std::vector<std::string>& class_names);

/// Z-score standardizer using the population standard deviation.
struct Scaler {
  Vector means;
  Vector stds;
  /// True where the column had zero variance (std stored as 1.0).
  std::vector<bool> constant;

  Matrix transform(const Matrix& x) const;
  Matrix inverse_transform(const Matrix& z) const;

  nlohmann::json to_json() const;
  static Scaler from_json(const nlohmann::json& j);
};

Scaler fit_scaler(const Matrix& x);

struct FeatureCorrelation {
  std::string feature;
  double r = 0.0;
};

/// Pearson r of every raw feature against the encoded labels, sorted by
/// descending r (ties by ascending name). Zero-variance features get 0.
std::vector<FeatureCorrelation> feature_target_correlation(const Dataset& ds);

/// Plain Pearson correlation of two equal-length series; 0 when either
/// has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

std::string correlation_csv(const std::vector<FeatureCorrelation>& ranking);

enum class DatasetVersion { V1, V2, V3, V4 };

std::string_view to_string(DatasetVersion v);
DatasetVersion parse_version(std::string_view text);

/// Ambient columns removed from V2 onward.
inline const std::vector<std::string>& ambient_columns() {
  static const std::vector<std::string> names = {"temperature", "pressure"};
  return names;
}

/// A feature configuration. V3 carries a fitted PCA model and V4 an LDA
/// model; both act on the standardized V2 columns.
struct VersionSpec {
  DatasetVersion version = DatasetVersion::V1;
  std::vector<std::string> dropped_columns;
  std::variant<std::monostate, PcaModel, LdaModel> reducer;

  nlohmann::json to_json() const;
  static VersionSpec from_json(const nlohmann::json& j);
};

/// Spec with no reducer fitted yet; V3/V4 still need `fit_version_reducer`.
VersionSpec make_version_spec(DatasetVersion version);

/// Fits the V3/V4 reducer on (already dropped and standardized) training
/// data. `components` of 0 means "all available": min(d, 7) for PCA and
/// min(C-1, d) for LDA.
void fit_version_reducer(VersionSpec& spec, const Dataset& train, int components = 0);

/// V1 identity, V2 drops the ambient columns, V3/V4 project through the
/// fitted reducer. Labels and row order are unchanged.
Dataset apply_version(const Dataset& ds, const VersionSpec& spec);

/// Just the column-dropping part of `apply_version`.
Dataset drop_columns(const Dataset& ds, const std::vector<std::string>& columns);

}  // namespace enose
