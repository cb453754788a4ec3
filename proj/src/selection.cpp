#include "enose/selection.hpp"

#include "enose/ensemble.hpp"
#include "enose/error.hpp"
#include "enose/forest.hpp"
#include "enose/json_util.hpp"
#include "enose/metrics.hpp"
#include "enose/neural.hpp"
#include "enose/parallel.hpp"
#include "enose/rng.hpp"
#include "enose/svm.hpp"
#include "enose/tree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace enose {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Svm: return "svm";
    case Family::DecisionTree: return "dt";
    case Family::RandomForest: return "rf";
    case Family::Mlp: return "mlp";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "svm") return Family::Svm;
  if (name == "dt") return Family::DecisionTree;
  if (name == "rf") return Family::RandomForest;
  if (name == "mlp") return Family::Mlp;
  throw Error(ErrorCode::BadParameter, "unknown model family '" + std::string(name) + "'");
}

std::string format_params(const ParamSet& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    if (!out.empty()) out += ' ';
    out += k + '=' + v;
  }
  return out;
}

nlohmann::json params_to_json(const ParamSet& params) {
  auto j = nlohmann::json::object();
  for (const auto& [k, v] : params) j[k] = v;
  return j;
}

namespace {

double as_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw Error(ErrorCode::BadParameter, key + ": expected a number, got '" + text + "'");
  }
  return v;
}

long long as_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::BadParameter, key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

bool as_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw Error(ErrorCode::BadParameter, key + ": expected true/false, got '" + text + "'");
}

[[noreturn]] void unknown(Family f, const std::string& key) {
  throw Error(ErrorCode::BadParameter,
              "unknown " + std::string(to_string(f)) + " parameter '" + key + "'");
}

// Applies the tree keys shared by the tree and forest families; returns
// false for keys it does not own.
bool apply_tree_key(TreeParams& p, const std::string& key, const std::string& value) {
  if (key == "max_depth") {
    if (value == "none") {
      p.max_depth.reset();
    } else {
      p.max_depth = static_cast<int>(as_int(key, value));
    }
  } else if (key == "min_samples_split") {
    p.min_samples_split = static_cast<int>(as_int(key, value));
  } else if (key == "min_samples_leaf") {
    p.min_samples_leaf = static_cast<int>(as_int(key, value));
  } else {
    return false;
  }
  return true;
}

}  // namespace

ClassifierPtr fit_family(Family family, const ParamSet& params, const Dataset& train,
                         const FitOptions& options) {
  const int c = train.num_classes();
  switch (family) {
    case Family::Svm: {
      SvmParams p;
      for (const auto& [key, value] : params) {
        if (key == "kernel") {
          if (value == "linear") {
            p.kernel = KernelType::Linear;
          } else if (value == "rbf") {
            p.kernel = KernelType::Rbf;
          } else {
            throw Error(ErrorCode::BadParameter, "kernel: expected linear or rbf, got '" + value + "'");
          }
        } else if (key == "C") {
          p.C = as_double(key, value);
        } else if (key == "gamma") {
          if (value == "scale") {
            p.gamma.reset();
          } else {
            p.gamma = as_double(key, value);
          }
        } else if (key == "tol") {
          p.tol = as_double(key, value);
        } else if (key == "max_passes") {
          p.max_passes = static_cast<int>(as_int(key, value));
        } else if (key != "seed") {
          unknown(family, key);
        }
      }
      return std::make_shared<SvmClassifier>(svm_fit_multiclass(train.features, train.labels, c, p, options));
    }
    case Family::DecisionTree: {
      TreeParams p;
      for (const auto& [key, value] : params) {
        if (!apply_tree_key(p, key, value) && key != "seed") unknown(family, key);
      }
      return std::make_shared<DecisionTree>(dt_fit(train.features, train.labels, c, p));
    }
    case Family::RandomForest: {
      ForestParams p;
      for (const auto& [key, value] : params) {
        if (apply_tree_key(p.tree, key, value)) continue;
        if (key == "n_estimators") {
          p.n_estimators = static_cast<int>(as_int(key, value));
        } else if (key == "max_features") {
          p.max_features = MaxFeatures::parse(value);
        } else if (key == "bootstrap") {
          p.bootstrap = as_bool(key, value);
        } else if (key == "seed") {
          p.seed = static_cast<std::uint64_t>(as_int(key, value));
        } else {
          unknown(family, key);
        }
      }
      return std::make_shared<RandomForest>(rf_fit(train.features, train.labels, c, p, options));
    }
    case Family::Mlp: {
      std::string variant = "baseline";
      for (const auto& [key, value] : params) {
        if (key == "variant") variant = value;
      }
      auto spec = variant_spec(variant, static_cast<int>(train.num_features()), c);
      for (const auto& [key, value] : params) {
        if (key == "variant") continue;
        if (key == "epochs") {
          spec.epochs = static_cast<int>(as_int(key, value));
        } else if (key == "batch_size") {
          spec.batch_size = static_cast<int>(as_int(key, value));
        } else if (key == "seed") {
          spec.seed = static_cast<std::uint64_t>(as_int(key, value));
        } else {
          unknown(family, key);
        }
      }
      return std::make_shared<Mlp>(mlp_train(mlp_build(spec), train));
    }
  }
  throw Error(ErrorCode::BadParameter, "unhandled model family");
}

ModelFactory family_factory(Family family, ParamSet params, FitOptions options) {
  return [family, params = std::move(params), options](const Dataset& train) {
    return fit_family(family, params, train, options);
  };
}

ModelFactory ensemble_factory(std::vector<std::pair<Family, ParamSet>> members, FitOptions options) {
  return [members = std::move(members), options](const Dataset& train) -> ClassifierPtr {
    std::vector<ClassifierPtr> fitted;
    fitted.reserve(members.size());
    for (const auto& [family, params] : members) fitted.push_back(fit_family(family, params, train, options));
    return std::make_shared<VotingEnsemble>(std::move(fitted));
  };
}

// ---------------------------------------------------------------------------

Dataset PipelineModel::transform(const Dataset& raw) const {
  Matrix x(raw.features.rows(), static_cast<Eigen::Index>(input_features.size()));
  for (std::size_t j = 0; j < input_features.size(); ++j) {
    const auto it = std::find(raw.feature_names.begin(), raw.feature_names.end(), input_features[j]);
    if (it == raw.feature_names.end()) {
      throw Error(ErrorCode::MissingColumn, "input is missing feature '" + input_features[j] + "'");
    }
    x.col(static_cast<Eigen::Index>(j)) = raw.features.col(it - raw.feature_names.begin());
  }
  Dataset ds = raw.with_features(input_features, std::move(x));
  if (!version.dropped_columns.empty()) ds = drop_columns(ds, version.dropped_columns);
  ds = ds.with_features(ds.feature_names, scaler.transform(ds.features));
  VersionSpec projection = version;
  projection.dropped_columns.clear();
  return apply_version(ds, projection);
}

Matrix PipelineModel::predict_proba(const Dataset& raw) const {
  return model->predict_proba(transform(raw).features);
}

nlohmann::json PipelineModel::to_json() const {
  return {{"format", "enose-pipeline"},
          {"format_version", kModelFormatVersion},
          {"input_features", input_features},
          {"classes", classes},
          {"version", version.to_json()},
          {"scaler", scaler.to_json()},
          {"model", model->to_json()}};
}

PipelineModel PipelineModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "enose-pipeline") {
      throw Error(ErrorCode::Format, "not a pipeline document");
    }
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::Format, "unsupported pipeline format version");
    }
    PipelineModel p;
    p.input_features = j.at("input_features").get<std::vector<std::string>>();
    p.classes = j.at("classes").get<std::vector<std::string>>();
    p.version = VersionSpec::from_json(j.at("version"));
    p.scaler = Scaler::from_json(j.at("scaler"));
    p.model = classifier_from_json(j.at("model"));
    if (p.model->num_classes() != static_cast<int>(p.classes.size())) {
      throw Error(ErrorCode::ClassTableMismatch, "model and class table disagree");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("malformed pipeline document: ") + e.what());
  }
}

PipelineModel fit_transforms(const Dataset& train, DatasetVersion version) {
  PipelineModel p;
  p.input_features = train.feature_names;
  p.classes = train.classes;
  p.version = make_version_spec(version);
  Dataset ds = p.version.dropped_columns.empty() ? train : drop_columns(train, p.version.dropped_columns);
  p.scaler = fit_scaler(ds.features);
  ds = ds.with_features(ds.feature_names, p.scaler.transform(ds.features));
  fit_version_reducer(p.version, ds);
  return p;
}

PipelineModel fit_pipeline(const Dataset& train, DatasetVersion version, const ModelFactory& factory) {
  PipelineModel p = fit_transforms(train, version);
  p.model = factory(p.transform(train));
  return p;
}

// ---------------------------------------------------------------------------

namespace {

struct FoldOutcome {
  double val = 0.0;
  double train = 0.0;
  bool failed = false;
  bool converged = true;
  std::string error;
};

FoldOutcome run_fold(const ModelFactory& factory, DatasetVersion version, const Dataset& ds,
                     std::span<const std::size_t> train_idx, std::span<const std::size_t> val_idx) {
  FoldOutcome out;
  try {
    const Dataset train = ds.subset(train_idx);
    const Dataset val = ds.subset(val_idx);
    const PipelineModel p = fit_pipeline(train, version, factory);
    out.val = accuracy(val.labels, argmax_rows(p.predict_proba(val)));
    out.train = accuracy(train.labels, argmax_rows(p.predict_proba(train)));
    out.converged = p.model->converged();
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

CvResult summarize(std::span<const FoldOutcome> folds) {
  CvResult r;
  double sum = 0.0, train_sum = 0.0;
  std::size_t ok = 0;
  for (const auto& f : folds) {
    r.val_accuracy.push_back(f.val);
    r.train_accuracy.push_back(f.train);
    r.failed.push_back(f.failed);
    r.errors.push_back(f.error);
    r.converged = r.converged && f.converged;
    if (!f.failed) {
      sum += f.val;
      train_sum += f.train;
      ++ok;
    }
  }
  if (ok == 0) {
    r.mean = -std::numeric_limits<double>::infinity();
    r.train_mean = r.mean;
    return r;
  }
  r.mean = sum / static_cast<double>(ok);
  r.train_mean = train_sum / static_cast<double>(ok);
  double ss = 0.0;
  for (const auto& f : folds) {
    if (!f.failed) ss += (f.val - r.mean) * (f.val - r.mean);
  }
  r.std = std::sqrt(ss / static_cast<double>(ok));
  return r;
}

}  // namespace

bool CvResult::any_failed() const {
  return std::any_of(failed.begin(), failed.end(), [](bool f) { return f; });
}

nlohmann::json CvResult::to_json() const {
  auto errs = nlohmann::json::array();
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (failed[i]) errs.push_back({{"fold", i}, {"error", errors[i]}});
  }
  return {{"val_accuracy", val_accuracy},
          {"train_accuracy", train_accuracy},
          {"mean", finite_or_null(mean)},
          {"std", std},
          {"train_mean", finite_or_null(train_mean)},
          {"converged", converged},
          {"failed_folds", errs}};
}

CvResult cross_validate(const ModelFactory& factory, DatasetVersion version, const Dataset& ds,
                        const FoldPlan& plan, std::size_t workers) {
  std::vector<FoldOutcome> outcomes(plan.k());
  parallel_for(plan.k(), workers, [&](std::size_t f) {
    outcomes[f] = run_fold(factory, version, ds, plan.folds[f].train, plan.folds[f].validation);
  });
  return summarize(outcomes);
}

std::vector<ParamSet> GridSpec::cells() const {
  if (axes.empty()) throw Error(ErrorCode::EmptyGrid, "grid has no axes");
  for (const auto& [name, values] : axes) {
    if (values.empty()) throw Error(ErrorCode::EmptyGrid, "grid axis '" + name + "' has no values");
  }
  std::vector<ParamSet> out;
  std::vector<std::size_t> pos(axes.size(), 0);
  for (;;) {
    ParamSet cell = fixed;
    for (std::size_t a = 0; a < axes.size(); ++a) cell.emplace_back(axes[a].first, axes[a].second[pos[a]]);
    out.push_back(std::move(cell));
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++pos[a] < axes[a].second.size()) break;
      pos[a] = 0;
      if (a == 0) return out;
    }
  }
}

GridResult grid_search(const GridSpec& spec, const Dataset& ds, const FoldPlan& plan,
                       DatasetVersion version, std::size_t workers, const FactoryMaker& maker) {
  const auto cells = spec.cells();
  if (plan.k() == 0) throw Error(ErrorCode::BadK, "fold plan is empty");
  std::vector<ModelFactory> factories;
  for (const auto& cell : cells) {
    factories.push_back(maker ? maker(cell) : family_factory(spec.family, cell));
  }
  // A linear kernel ignores gamma, so cells differing only in gamma share
  // the first such cell's folds.
  std::vector<std::size_t> source(cells.size());
  std::vector<ParamSet> effective;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    ParamSet key = cells[c];
    const bool linear = std::any_of(key.begin(), key.end(), [](const auto& kv) {
      return kv.first == "kernel" && kv.second == "linear";
    });
    if (spec.family == Family::Svm && linear) {
      std::erase_if(key, [](const auto& kv) { return kv.first == "gamma"; });
    }
    const auto it = std::find(effective.begin(), effective.end(), key);
    source[c] = it == effective.end() ? c : source[static_cast<std::size_t>(it - effective.begin())];
    effective.push_back(std::move(key));
  }
  std::vector<std::size_t> units;
  const std::size_t k = plan.k();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (source[c] != c) continue;
    for (std::size_t f = 0; f < k; ++f) units.push_back(c * k + f);
  }
  std::vector<FoldOutcome> outcomes(cells.size() * k);
  parallel_for(units.size(), workers, [&](std::size_t i) {
    const std::size_t u = units[i];
    const auto& fold = plan.folds[u % k];
    outcomes[u] = run_fold(factories[u / k], version, ds, fold.train, fold.validation);
  });
  for (std::size_t u = 0; u < outcomes.size(); ++u) {
    const std::size_t c = u / k;
    if (source[c] != c) outcomes[u] = outcomes[source[c] * k + u % k];
  }
  GridResult result;
  result.family = spec.family;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    GridCell cell;
    cell.params = cells[c];
    cell.cv = summarize(std::span<const FoldOutcome>(outcomes).subspan(c * k, k));
    cell.score = cell.cv.any_failed() || !cell.cv.converged ? -std::numeric_limits<double>::infinity()
                                                             : cell.cv.mean;
    if (c == 0 || cell.score > result.cells[result.best].score) result.best = c;
    result.cells.push_back(std::move(cell));
  }
  return result;
}

nlohmann::json GridResult::to_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& c : cells) {
    arr.push_back({{"params", params_to_json(c.params)}, {"score", finite_or_null(c.score)}, {"cv", c.cv.to_json()}});
  }
  return {{"family", to_string(family)}, {"best", best}, {"cells", arr}};
}

std::string GridResult::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "cell,params,mean,std,train_mean,converged,failed_folds,best\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const auto failed = std::count(c.cv.failed.begin(), c.cv.failed.end(), true);
    out << i << ',' << format_params(c.params) << ',';
    if (std::isfinite(c.cv.mean)) out << c.cv.mean;
    out << ',' << c.cv.std << ',';
    if (std::isfinite(c.cv.train_mean)) out << c.cv.train_mean;
    out << ',' << (c.cv.converged ? "true" : "false") << ',' << failed << ','
        << (i == best ? "true" : "false") << '\n';
  }
  return out.str();
}

std::vector<LearningPoint> learning_curve(const ModelFactory& factory, DatasetVersion version,
                                          const Dataset& ds, const std::vector<double>& sizes,
                                          const FoldPlan& plan, std::size_t workers) {
  if (sizes.empty()) throw Error(ErrorCode::BadSizes, "no learning-curve sizes");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(sizes[i] > 0.0 && sizes[i] <= 1.0)) {
      throw Error(ErrorCode::BadSizes, "size " + std::to_string(sizes[i]) + " outside (0, 1]");
    }
    if (i > 0 && !(sizes[i] > sizes[i - 1])) {
      throw Error(ErrorCode::BadSizes, "sizes must be strictly ascending");
    }
  }
  const int c = ds.num_classes();
  const std::size_t k = plan.k();
  // Per fold and class, one seeded permutation shared by all sizes, so the
  // subsets are nested.
  std::vector<std::vector<std::vector<std::size_t>>> by_class(k);
  for (std::size_t f = 0; f < k; ++f) {
    by_class[f].resize(static_cast<std::size_t>(c));
    for (std::size_t idx : plan.folds[f].train) {
      by_class[f][static_cast<std::size_t>(ds.labels[idx])].push_back(idx);
    }
    for (int cls = 0; cls < c; ++cls) {
      Rng rng(plan.seed, "lcurve", f * static_cast<std::size_t>(c) + static_cast<std::size_t>(cls));
      rng.shuffle(std::span<std::size_t>(by_class[f][static_cast<std::size_t>(cls)]));
    }
  }
  std::vector<FoldOutcome> outcomes(sizes.size() * k);
  std::vector<std::size_t> subset_sizes(outcomes.size());
  parallel_for(outcomes.size(), workers, [&](std::size_t u) {
    const double s = sizes[u / k];
    const std::size_t f = u % k;
    std::vector<std::size_t> subset;
    for (const auto& members : by_class[f]) {
      const auto take = std::min(members.size(),
                                 static_cast<std::size_t>(std::ceil(s * static_cast<double>(members.size()) - 1e-9)));
      subset.insert(subset.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    }
    std::sort(subset.begin(), subset.end());
    subset_sizes[u] = subset.size();
    outcomes[u] = run_fold(factory, version, ds, subset, plan.folds[f].validation);
  });
  std::vector<LearningPoint> points;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    LearningPoint p;
    p.fraction = sizes[i];
    double n = 0.0;
    for (std::size_t f = 0; f < k; ++f) n += static_cast<double>(subset_sizes[i * k + f]);
    p.train_size = n / static_cast<double>(k);
    const auto cv = summarize(std::span<const FoldOutcome>(outcomes).subspan(i * k, k));
    p.train_accuracy = cv.train_mean;
    p.val_accuracy = cv.mean;
    p.failed_folds = static_cast<std::size_t>(std::count(cv.failed.begin(), cv.failed.end(), true));
    points.push_back(p);
  }
  return points;
}

std::string learning_curve_csv(const std::vector<LearningPoint>& points) {
  std::ostringstream out;
  out.precision(17);
  out << "fraction,train_size,train_accuracy,val_accuracy,failed_folds\n";
  for (const auto& p : points) {
    out << p.fraction << ',' << p.train_size << ',' << p.train_accuracy << ',' << p.val_accuracy << ','
        << p.failed_folds << '\n';
  }
  return out.str();
}

}  // namespace enose
