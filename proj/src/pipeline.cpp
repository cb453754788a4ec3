#include "enose/pipeline.hpp"

#include "enose/error.hpp"
#include "enose/json_util.hpp"
#include "enose/neural.hpp"
#include "enose/report.hpp"
#include "enose/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>
#include <sstream>

namespace enose {

namespace fs = std::filesystem;

std::string StageError::strip_code(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

int exit_code_for(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  if (err == nullptr) return 2;
  switch (err->code()) {
    case ErrorCode::Config:
    case ErrorCode::BadParameter:
    case ErrorCode::BadSizes:
    case ErrorCode::BadK:
    case ErrorCode::InvalidFraction:
    case ErrorCode::UnknownVariant:
    case ErrorCode::EmptyGrid:
    case ErrorCode::BadSpec:
      return 1;
    default:
      return 2;
  }
}

namespace {

template <typename F>
auto in_stage(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  } catch (const std::exception& e) {
    throw StageError(stage, Error(ErrorCode::Internal, e.what()));
  }
}

/// Shortest text that round-trips; empty for non-finite values.
std::string num(double v) {
  if (!std::isfinite(v)) return {};
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::string{};
}

class Bundle {
 public:
  explicit Bundle(const PipelineConfig& config) : dir_(config.out_dir), formats_(config.formats) {}

  bool wants(const std::string& format) const { return formats_.count(format) > 0; }
  const fs::path& dir() const { return dir_; }

  void write(const fs::path& rel, std::string_view content) const { write_text_file(dir_ / rel, content); }
  void write_json(const fs::path& rel, const nlohmann::json& j) const {
    if (wants("json")) write(rel, j.dump(2) + "\n");
  }
  void write_csv(const fs::path& rel, std::string_view content) const {
    if (wants("csv")) write(rel, content);
  }
  void write_svg(const fs::path& rel, const std::string& content) const {
    if (wants("svg")) write(rel, content);
  }

 private:
  fs::path dir_;
  std::set<std::string> formats_;
};

void write_eval(const Bundle& out, const fs::path& stem_dir, const std::string& name, const EvalReport& report) {
  out.write_json(stem_dir / (name + ".json"), report.to_json());
  out.write_csv(stem_dir / (name + "_classification.csv"), report.classification_csv());
  out.write_csv(stem_dir / (name + "_confusion.csv"), report.confusion_csv());
  out.write_csv(stem_dir / (name + "_roc.csv"), report.roc_csv());
  out.write_svg(fs::path("plots") / (name + "_confusion.svg"), svg_confusion(report, name + " confusion"));
  out.write_svg(fs::path("plots") / (name + "_roc.svg"), svg_roc(report, name + " ROC"));
}

struct Context {
  const PipelineConfig& config;
  const Bundle& out;
  std::ostream& log;
  const Dataset& train;
  const Dataset& test;
  const FoldPlan& plan;
};

/// Fits, scores and writes one model; any failure is recorded on the
/// record rather than thrown.
void finish_model(const Context& ctx, ModelRecord& rec, const std::function<PipelineModel()>& fit,
                  const std::function<CvResult()>& cv = {}) {
  try {
    if (cv) rec.cv = in_stage("cv", cv);
    PipelineModel model = in_stage("fit", fit);
    rec.converged = model.model->converged() && (!rec.cv || rec.cv->converged);
    EvalReport report = in_stage("evaluate", [&] {
      const Matrix train_proba = model.predict_proba(ctx.train);
      rec.train_accuracy = accuracy(ctx.train.labels, argmax_rows(train_proba));
      return evaluate_predictions(ctx.test.labels, model.predict_proba(ctx.test), ctx.test.classes);
    });
    rec.test_accuracy = report.prf.accuracy;
    rec.macro_f1 = report.prf.macro.f1;
    rec.micro_auc = report.roc.micro_auc;
    in_stage("write", [&] {
      write_eval(ctx.out, "reports", rec.name, report);
      ctx.out.write(fs::path("models") / (rec.name + ".json"), model.to_json().dump() + "\n");
      if (const auto* mlp = dynamic_cast<const Mlp*>(model.model.get())) {
        ctx.out.write_csv(fs::path("curves") / (rec.name + "_history.csv"), history_csv(mlp->history()));
        Series train{"train", {}, {}};
        Series val{"validation", {}, {}};
        for (const auto& h : mlp->history()) {
          train.x.push_back(h.epoch);
          train.y.push_back(h.train_acc);
          val.x.push_back(h.epoch);
          val.y.push_back(h.val_acc);
        }
        const double epochs = mlp->history().empty() ? 1.0 : mlp->history().back().epoch;
        ctx.out.write_svg(fs::path("plots") / (rec.name + "_history.svg"),
                          svg_lines({train, val}, rec.name + " training", "epoch", "accuracy", 0, epochs, 0, 1));
      }
    });
    ctx.log << "[run] " << rec.name << " test accuracy " << fixed(rec.test_accuracy, 4) << '\n';
  } catch (const StageError& e) {
    rec.status = "failed: " + e.stage() + ": " + StageError::strip_code(e);
    ctx.log << "[run] " << rec.name << " " << rec.status << '\n';
  }
}

ParamSet with_seed(Family family, ParamSet params, std::uint64_t seed) {
  if (family == Family::RandomForest) {
    std::erase_if(params, [](const auto& kv) { return kv.first == "seed"; });
    params.emplace_back("seed", std::to_string(seed));
  }
  return params;
}

nlohmann::json record_json(const ModelRecord& r, bool best) {
  return {{"name", r.name},
          {"family", r.family},
          {"version", to_string(r.version)},
          {"params", params_to_json(r.params)},
          {"cv", r.cv ? r.cv->to_json() : nlohmann::json(nullptr)},
          {"train_accuracy", finite_or_null(r.train_accuracy)},
          {"test_accuracy", finite_or_null(r.test_accuracy)},
          {"macro_f1", finite_or_null(r.macro_f1)},
          {"micro_auc", finite_or_null(r.micro_auc)},
          {"converged", r.converged},
          {"status", r.status},
          {"best", best}};
}

}  // namespace

// ---------------------------------------------------------------------------

SynthSpec synth_spec_for(const PipelineConfig& config) {
  SynthSpec spec = default_spec(config.data.samples_per_class);
  if (!config.data.profiles.empty()) load_profiles(spec, config.data.profiles);
  spec.drift.enabled = config.data.drift;
  spec.seed = config.data.seed;
  spec.validate();
  return spec;
}

Dataset load_data(const PipelineConfig& config) {
  const auto& d = config.data;
  if (d.source == "synth") return generate(synth_spec_for(config), std::nullopt, config.workers);
  if (d.source == "manifest") return load_manifest(d.manifest);
  if (d.source == "directory") return load_directory(d.directory);
  throw Error(ErrorCode::Config, "[data] source: unknown source '" + d.source + "'");
}

SynthOutput cmd_synth(const PipelineConfig& config, std::ostream& log) {
  const SynthSpec spec = in_stage("synth", [&] { return synth_spec_for(config); });
  const Dataset ds = in_stage("synth", [&] { return generate(spec, std::nullopt, config.workers); });
  auto out = in_stage("write", [&] { return write_runs(ds, config.out_dir); });
  log << "wrote " << out.files.size() << " run files (" << spec.samples_per_class << " rows each) and "
      << out.manifest.string() << '\n';
  return out;
}

Dataset cmd_ingest(const PipelineConfig& config, std::ostream& log) {
  Dataset ds = in_stage("ingest", [&] { return load_data(config); });
  in_stage("write", [&] { write_text_file(config.out_dir / "dataset.csv", dataset_to_csv(ds)); });
  const auto counts = ds.class_counts();
  log << "ingested " << ds.size() << " rows, " << ds.num_features() << " features, " << ds.num_classes()
      << " classes\n";
  for (int c = 0; c < ds.num_classes(); ++c) {
    log << "  " << ds.classes[static_cast<std::size_t>(c)] << ": " << counts[static_cast<std::size_t>(c)] << '\n';
  }
  return ds;
}

std::vector<FeatureCorrelation> cmd_inspect(const PipelineConfig& config, std::ostream& log) {
  const Dataset ds = in_stage("ingest", [&] { return load_data(config); });
  auto ranking = in_stage("correlation", [&] { return feature_target_correlation(ds); });
  in_stage("write", [&] { write_text_file(config.out_dir / "correlation.csv", correlation_csv(ranking)); });
  if (!ranking.empty()) {
    log << "most positive: " << ranking.front().feature << " r=" << fixed(ranking.front().r, 4) << '\n'
        << "most negative: " << ranking.back().feature << " r=" << fixed(ranking.back().r, 4) << '\n';
  }
  return ranking;
}

// ---------------------------------------------------------------------------

bool RunResult::complete() const {
  return std::all_of(models.begin(), models.end(), [](const ModelRecord& r) { return r.ok(); });
}

const ModelRecord* RunResult::find(const std::string& name) const {
  for (const auto& r : models) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

nlohmann::json RunResult::summary_json() const {
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < models.size(); ++i) arr.push_back(record_json(models[i], best && *best == i));
  return {{"models", arr},
          {"best", best ? nlohmann::json(models[*best].name) : nlohmann::json(nullptr)},
          {"complete", complete()}};
}

std::string RunResult::summary_csv() const {
  std::ostringstream out;
  out << "model,family,version,params,cv_mean,cv_std,cv_train_mean,train_accuracy,test_accuracy,macro_f1,"
         "micro_auc,converged,status,best\n";
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& r = models[i];
    out << r.name << ',' << r.family << ',' << to_string(r.version) << ',' << format_params(r.params) << ',';
    if (r.cv) out << num(r.cv->mean) << ',' << num(r.cv->std) << ',' << num(r.cv->train_mean);
    else out << ",,";
    out << ',';
    if (r.ok()) {
      out << num(r.train_accuracy) << ',' << num(r.test_accuracy) << ',' << num(r.macro_f1) << ','
          << num(r.micro_auc);
    } else {
      out << ",,,";
    }
    out << ',' << (r.converged ? "true" : "false") << ',' << r.status << ','
        << (best && *best == i ? "*" : "") << '\n';
  }
  return out.str();
}

nlohmann::json RunResult::gap_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& g : gaps) {
    arr.push_back({{"family", g.family}, {"V1", g.v1}, {"V2", g.v2}, {"gap", g.gap}});
  }
  return {{"metric", "test_accuracy"}, {"definition", "V1 - V2"}, {"gaps", arr}};
}

RunResult cmd_run(const PipelineConfig& config, std::ostream& log) {
  in_stage("config", [&] { config.validate(); });
  const Bundle out(config);
  RunResult result;
  in_stage("write", [&] { out.write("config.ini", config.to_ini()); });

  const Dataset ds = in_stage("data", [&] { return load_data(config); });
  log << "[run] data: " << ds.size() << " rows, " << ds.num_classes() << " classes\n";
  result.correlation = in_stage("correlation", [&] { return feature_target_correlation(ds); });
  out.write_csv("correlation.csv", correlation_csv(result.correlation));

  const auto [train, test] = in_stage("split", [&] { return stratified_split(ds, config.test_fraction, config.split_seed); });
  const FoldPlan plan = in_stage("split", [&] {
    return stratified_kfold(train.labels, config.folds, derive_seed(config.split_seed, "folds"));
  });
  const Context ctx{config, out, log, train, test, plan};
  const std::size_t workers = config.workers;
  const FitOptions fit_options{workers};

  // Untuned baselines across versions.
  for (Family f : config.families) {
    for (DatasetVersion v : config.baseline_versions) {
      ModelRecord rec;
      rec.family = std::string(to_string(f));
      rec.version = v;
      rec.name = "baseline_" + rec.family + "_" + std::string(to_string(v));
      rec.params = with_seed(f, {}, config.model_seed);
      const auto factory = family_factory(f, rec.params, {});
      finish_model(
          ctx, rec, [&] { return fit_pipeline(train, v, family_factory(f, rec.params, fit_options)); },
          [&] { return cross_validate(factory, v, train, plan, workers); });
      result.models.push_back(std::move(rec));
    }
  }

  // Grid search, tuned refits and learning curves on the configured version.
  const DatasetVersion tv = config.version;
  std::map<Family, ParamSet> tuned;
  for (Family f : config.families) {
    ModelRecord rec;
    rec.family = std::string(to_string(f));
    rec.version = tv;
    rec.name = "tuned_" + rec.family + "_" + std::string(to_string(tv));
    try {
      GridSpec grid = config.grids.count(f) ? config.grids.at(f) : default_grid(f);
      grid.family = f;
      grid.fixed = with_seed(f, grid.fixed, config.model_seed);
      GridResult gr = in_stage("grid." + rec.family, [&] { return grid_search(grid, train, plan, tv, workers); });
      in_stage("write", [&] {
        out.write_json(fs::path("grids") / (rec.family + ".json"), gr.to_json());
        out.write_csv(fs::path("grids") / (rec.family + ".csv"), gr.to_csv());
      });
      const auto& best = gr.best_cell();
      if (!std::isfinite(best.score)) {
        throw StageError("grid." + rec.family, Error(ErrorCode::EmptyGrid, "every cell failed or did not converge"));
      }
      rec.params = best.params;
      rec.cv = best.cv;
      log << "[run] grid " << rec.family << ": best " << format_params(best.params) << " cv "
          << fixed(best.score, 4) << '\n';
      result.grids.push_back(std::move(gr));
    } catch (const StageError& e) {
      rec.status = "failed: " + e.stage() + ": " + StageError::strip_code(e);
      log << "[run] " << rec.name << " " << rec.status << '\n';
      result.models.push_back(std::move(rec));
      continue;
    }
    finish_model(ctx, rec, [&] { return fit_pipeline(train, tv, family_factory(f, rec.params, fit_options)); });
    if (rec.ok()) {
      tuned[f] = rec.params;
      if (config.learning_curves) {
        try {
          const auto points = in_stage("learning_curve", [&] {
            return learning_curve(family_factory(f, rec.params), tv, train, config.learning_curve_sizes, plan,
                                  workers);
          });
          out.write_csv(fs::path("curves") / (rec.name + "_learning.csv"), learning_curve_csv(points));
          out.write_svg(fs::path("plots") / (rec.name + "_learning.svg"),
                        svg_learning_curve(points, rec.name + " learning curve"));
        } catch (const StageError& e) {
          rec.status = "failed: " + e.stage() + ": " + StageError::strip_code(e);
        }
      }
    }
    result.models.push_back(std::move(rec));
  }

  // Soft-vote ensemble of the tuned members.
  if (!config.ensemble.empty()) {
    ModelRecord rec;
    rec.family = "ensemble";
    rec.version = tv;
    rec.name = "ensemble_" + std::string(to_string(tv));
    std::string members;
    std::vector<std::pair<Family, ParamSet>> spec;
    for (Family f : config.ensemble) {
      members += (members.empty() ? "" : "+") + std::string(to_string(f));
      if (tuned.count(f)) spec.emplace_back(f, tuned.at(f));
    }
    rec.params = {{"members", members}};
    if (spec.size() != config.ensemble.size()) {
      rec.status = "failed: ensemble: a member's tuning failed";
      log << "[run] " << rec.name << " " << rec.status << '\n';
    } else {
      const auto factory = ensemble_factory(spec);
      finish_model(
          ctx, rec, [&] { return fit_pipeline(train, tv, ensemble_factory(spec, fit_options)); },
          [&] { return cross_validate(factory, tv, train, plan, workers); });
    }
    result.models.push_back(std::move(rec));
  }

  // Neural variants, each with a stratified validation carve-out of train.
  if (!config.ann_variants.empty()) {
    const auto [inner, validation] = in_stage("split", [&] {
      return stratified_split(train, config.ann_validation_fraction, derive_seed(config.split_seed, "ann-validation"));
    });
    for (const auto& variant : config.ann_variants) {
      for (DatasetVersion v : config.ann_versions) {
        ModelRecord rec;
        rec.family = "mlp";
        rec.version = v;
        rec.name = "ann_" + variant + "_" + std::string(to_string(v));
        rec.params = {{"variant", variant},
                      {"epochs", std::to_string(config.ann_epochs)},
                      {"batch_size", std::to_string(config.ann_batch)},
                      {"seed", std::to_string(config.model_seed)}};
        finish_model(ctx, rec, [&] {
          PipelineModel p = fit_transforms(inner, v);
          const Dataset ti = p.transform(inner);
          const Dataset tvd = p.transform(validation);
          MlpSpec spec = variant_spec(variant, static_cast<int>(ti.num_features()), ti.num_classes());
          spec.epochs = config.ann_epochs;
          spec.batch_size = config.ann_batch;
          spec.seed = config.model_seed;
          p.model = std::make_shared<Mlp>(mlp_train(mlp_build(spec), ti, &tvd));
          return p;
        });
        result.models.push_back(std::move(rec));
      }
    }
  }

  // Summary, version gaps, status.
  for (std::size_t i = 0; i < result.models.size(); ++i) {
    const auto& r = result.models[i];
    if (!r.ok()) continue;
    if (!result.best || r.test_accuracy > result.models[*result.best].test_accuracy) result.best = i;
  }
  auto add_gap = [&](const std::string& family, const std::string& v1_name, const std::string& v2_name) {
    const auto* a = result.find(v1_name);
    const auto* b = result.find(v2_name);
    if (a && b && a->ok() && b->ok()) {
      result.gaps.push_back({family, a->test_accuracy, b->test_accuracy, a->test_accuracy - b->test_accuracy});
    }
  };
  for (Family f : config.families) {
    const std::string fam(to_string(f));
    add_gap(fam, "baseline_" + fam + "_V1", "baseline_" + fam + "_V2");
  }
  for (const auto& variant : config.ann_variants) add_gap("ann_" + variant, "ann_" + variant + "_V1", "ann_" + variant + "_V2");

  in_stage("write", [&] {
    out.write_json("summary.json", result.summary_json());
    out.write_csv("summary.csv", result.summary_csv());
    out.write_json("version_gap.json", result.gap_json());
    std::vector<std::string> labels;
    std::vector<double> values;
    for (const auto& r : result.models) {
      labels.push_back(r.name);
      values.push_back(r.ok() ? r.test_accuracy : 0.0);
    }
    out.write_svg(fs::path("plots") / "summary.svg",
                  svg_bars(labels, values, "test accuracy", result.best.value_or(labels.size())));
    auto failed = nlohmann::json::array();
    for (const auto& r : result.models) {
      if (!r.ok()) failed.push_back({{"model", r.name}, {"status", r.status}});
    }
    // Always JSON: the status file is how partial bundles are flagged.
    out.write("status.json",
              nlohmann::json{{"complete", result.complete()}, {"models", result.models.size()}, {"failed", failed}}
                      .dump(2) +
                  "\n");
  });
  if (result.best) {
    const auto& b = result.models[*result.best];
    log << "[run] best: " << b.name << " test accuracy " << fixed(b.test_accuracy, 4) << '\n';
  }
  for (const auto& g : result.gaps) {
    log << "[run] V1 - V2 gap (" << g.family << "): " << fixed(g.gap, 4) << '\n';
  }
  return result;
}

EvalReport cmd_evaluate(const fs::path& model_path, const PipelineConfig& config, std::ostream& log) {
  const PipelineModel model = in_stage("load model", [&] {
    try {
      return PipelineModel::from_json(nlohmann::json::parse(read_text_file(model_path)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Format, model_path.string() + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), model_path.string() + ": " + StageError::strip_code(e));
    }
  });
  const Dataset ds = in_stage("data", [&] { return load_data(config); });
  if (ds.classes != model.classes) {
    throw StageError("evaluate", Error(ErrorCode::ClassTableMismatch,
                                       model_path.string() + ": model classes differ from the data's"));
  }
  const auto split = in_stage("split", [&] { return stratified_split(ds, config.test_fraction, config.split_seed); });
  const Dataset& test = split.second;
  EvalReport report = in_stage("evaluate", [&] {
    return evaluate_predictions(test.labels, model.predict_proba(test), test.classes);
  });
  const Bundle out(config);
  const std::string name = model_path.stem().string();
  in_stage("write", [&] { write_eval(out, "evaluate", name, report); });
  log << name << ": accuracy " << fixed(report.prf.accuracy, 4) << ", macro F1 " << fixed(report.prf.macro.f1, 4)
      << ", micro AUC " << fixed(report.roc.micro_auc, 4) << '\n';
  return report;
}

}  // namespace enose
