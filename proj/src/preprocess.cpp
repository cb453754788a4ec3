#include "enose/preprocess.hpp"

#include "enose/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace enose {

LabelEncoder::LabelEncoder(std::vector<std::string> names) {
  std::set<std::string> unique(names.begin(), names.end());
  classes_.assign(unique.begin(), unique.end());
}

int LabelEncoder::encode(const std::string& name) const {
  const auto it = std::lower_bound(classes_.begin(), classes_.end(), name);
  if (it == classes_.end() || *it != name) {
    throw Error(ErrorCode::LabelOutOfRange, "unknown class '" + name + "'");
  }
  return static_cast<int>(it - classes_.begin());
}

const std::string& LabelEncoder::decode(int index) const {
  if (index < 0 || index >= size()) {
    throw Error(ErrorCode::LabelOutOfRange, "class index " + std::to_string(index));
  }
  return classes_[static_cast<std::size_t>(index)];
}

LabelEncoder encode_labels(const std::vector<std::string>& class_names) {
  if (class_names.empty()) throw Error(ErrorCode::EmptyInput, "no class names");
  return LabelEncoder(class_names);
}

Scaler fit_scaler(const Matrix& x) {
  if (x.rows() == 0) throw Error(ErrorCode::EmptyMatrix, "cannot fit a scaler on zero rows");
  Scaler s;
  const auto n = static_cast<double>(x.rows());
  s.means = x.colwise().mean().transpose();
  s.stds.resize(x.cols());
  s.constant.assign(static_cast<std::size_t>(x.cols()), false);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.means[j]).square().sum() / n;
    const double sd = std::sqrt(var);
    if (sd > 0.0 && sd > 1e-12 * std::max(1.0, std::abs(s.means[j]))) {
      s.stds[j] = sd;
    } else {
      s.stds[j] = 1.0;
      s.constant[static_cast<std::size_t>(j)] = true;
    }
  }
  return s;
}

Matrix Scaler::transform(const Matrix& x) const {
  if (x.cols() != means.size()) {
    throw Error(ErrorCode::DimensionMismatch, "scaler expects " + std::to_string(means.size()) +
                                                  " columns, got " + std::to_string(x.cols()));
  }
  Matrix z = (x.rowwise() - means.transpose()).array().rowwise() / stds.transpose().array();
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    if (constant[static_cast<std::size_t>(j)]) z.col(j).setZero();
  }
  return z;
}

Matrix Scaler::inverse_transform(const Matrix& z) const {
  return (z.array().rowwise() * stds.transpose().array()).matrix().rowwise() + means.transpose();
}

nlohmann::json Scaler::to_json() const {
  std::vector<double> m(means.data(), means.data() + means.size());
  std::vector<double> s(stds.data(), stds.data() + stds.size());
  return {{"means", m}, {"stds", s}, {"constant", constant}};
}

Scaler Scaler::from_json(const nlohmann::json& j) {
  Scaler s;
  const auto m = j.at("means").get<std::vector<double>>();
  const auto sd = j.at("stds").get<std::vector<double>>();
  s.means = Eigen::Map<const Vector>(m.data(), static_cast<Eigen::Index>(m.size()));
  s.stds = Eigen::Map<const Vector>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  s.constant = j.at("constant").get<std::vector<bool>>();
  return s;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n != b.size()) throw Error(ErrorCode::DimensionMismatch, "series lengths differ");
  if (n == 0) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<FeatureCorrelation> feature_target_correlation(const Dataset& ds) {
  if (ds.size() < 2 || ds.num_features() == 0) {
    throw Error(ErrorCode::EmptyMatrix, "correlation needs at least 2 samples and 1 feature");
  }
  std::vector<double> y(ds.labels.begin(), ds.labels.end());
  std::vector<FeatureCorrelation> out;
  std::vector<double> column(ds.size());
  for (std::size_t j = 0; j < ds.num_features(); ++j) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
      column[i] = ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    out.push_back({ds.feature_names[j], pearson(column, y)});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.r != b.r) return a.r > b.r;
    return a.feature < b.feature;
  });
  return out;
}

std::string correlation_csv(const std::vector<FeatureCorrelation>& ranking) {
  std::ostringstream out;
  out.precision(17);
  out << "feature,r\n";
  for (const auto& f : ranking) out << f.feature << ',' << f.r << '\n';
  return out.str();
}

std::string_view to_string(DatasetVersion v) {
  switch (v) {
    case DatasetVersion::V1: return "V1";
    case DatasetVersion::V2: return "V2";
    case DatasetVersion::V3: return "V3";
    case DatasetVersion::V4: return "V4";
  }
  return "V1";
}

DatasetVersion parse_version(std::string_view text) {
  if (text == "V1" || text == "v1") return DatasetVersion::V1;
  if (text == "V2" || text == "v2") return DatasetVersion::V2;
  if (text == "V3" || text == "v3") return DatasetVersion::V3;
  if (text == "V4" || text == "v4") return DatasetVersion::V4;
  throw Error(ErrorCode::BadParameter, "unknown dataset version '" + std::string(text) + "'");
}

VersionSpec make_version_spec(DatasetVersion version) {
  VersionSpec spec;
  spec.version = version;
  if (version != DatasetVersion::V1) spec.dropped_columns = ambient_columns();
  return spec;
}

void fit_version_reducer(VersionSpec& spec, const Dataset& train, int components) {
  const int d = static_cast<int>(train.num_features());
  if (spec.version == DatasetVersion::V3) {
    const int m = components > 0 ? components : std::min(d, 7);
    spec.reducer = pca_fit(train.features, m);
  } else if (spec.version == DatasetVersion::V4) {
    const int m = components > 0 ? components : std::min(train.num_classes() - 1, d);
    spec.reducer = lda_fit(train.features, train.labels, m);
  }
}

Dataset drop_columns(const Dataset& ds, const std::vector<std::string>& columns) {
  std::vector<Eigen::Index> keep;
  std::vector<std::string> names;
  for (const auto& c : columns) {
    if (std::find(ds.feature_names.begin(), ds.feature_names.end(), c) == ds.feature_names.end()) {
      throw Error(ErrorCode::MissingColumn, "column '" + c + "' not present");
    }
  }
  for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
    if (std::find(columns.begin(), columns.end(), ds.feature_names[j]) == columns.end()) {
      keep.push_back(static_cast<Eigen::Index>(j));
      names.push_back(ds.feature_names[j]);
    }
  }
  Matrix x(ds.features.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    x.col(static_cast<Eigen::Index>(j)) = ds.features.col(keep[j]);
  }
  return ds.with_features(std::move(names), std::move(x));
}

Dataset apply_version(const Dataset& ds, const VersionSpec& spec) {
  Dataset dropped = spec.dropped_columns.empty() ? ds : drop_columns(ds, spec.dropped_columns);
  auto score_names = [](const std::string& prefix, int m) {
    std::vector<std::string> names;
    for (int i = 0; i < m; ++i) names.push_back(prefix + std::to_string(i + 1));
    return names;
  };
  switch (spec.version) {
    case DatasetVersion::V1:
    case DatasetVersion::V2:
      return dropped;
    case DatasetVersion::V3: {
      const auto* pca = std::get_if<PcaModel>(&spec.reducer);
      if (!pca) throw Error(ErrorCode::UnfittedReducer, "V3 requires a fitted PCA model");
      return dropped.with_features(score_names("pc", pca->num_components()),
                                   pca_transform(*pca, dropped.features));
    }
    case DatasetVersion::V4: {
      const auto* lda = std::get_if<LdaModel>(&spec.reducer);
      if (!lda) throw Error(ErrorCode::UnfittedReducer, "V4 requires a fitted LDA model");
      return dropped.with_features(score_names("ld", lda->num_components()),
                                   lda_transform(*lda, dropped.features));
    }
  }
  return dropped;
}

nlohmann::json VersionSpec::to_json() const {
  nlohmann::json j{{"version", std::string(to_string(version))},
                   {"dropped_columns", dropped_columns}};
  if (const auto* pca = std::get_if<PcaModel>(&reducer)) j["pca"] = pca->to_json();
  if (const auto* lda = std::get_if<LdaModel>(&reducer)) j["lda"] = lda->to_json();
  return j;
}

VersionSpec VersionSpec::from_json(const nlohmann::json& j) {
  VersionSpec spec;
  spec.version = parse_version(j.at("version").get<std::string>());
  spec.dropped_columns = j.at("dropped_columns").get<std::vector<std::string>>();
  if (j.contains("pca")) spec.reducer = PcaModel::from_json(j.at("pca"));
  if (j.contains("lda")) spec.reducer = LdaModel::from_json(j.at("lda"));
  return spec;
}

}  // namespace enose
