#include "enose/config.hpp"
#include "enose/dataset.hpp"
#include "enose/error.hpp"
#include "enose/metrics.hpp"
#include "enose/neural.hpp"
#include "enose/pipeline.hpp"
#include "enose/preprocess.hpp"
#include "enose/reduce.hpp"
#include "enose/selection.hpp"
#include "enose/synth.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <iostream>
#include <sstream>

namespace py = pybind11;
using namespace enose;

namespace {

// JSON crosses the boundary as text; the Python package decodes it.
std::string dump(const nlohmann::json& j) { return j.dump(); }

ParamSet to_params(const std::vector<std::pair<std::string, std::string>>& items) {
  return ParamSet(items.begin(), items.end());
}

py::exception<Error>* error_type = nullptr;

std::ostream& sink(bool verbose) {
  static std::ostringstream quiet;
  quiet.str({});
  return verbose ? std::cerr : quiet;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Electronic-nose odor classification core";

  // Leaked on purpose: the type must outlive interpreter teardown.
  error_type = new py::exception<Error>(m, "EnoseError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type->ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      exc.attr("exit_code") = exit_code_for(e);
      PyErr_SetObject(error_type->ptr(), exc.ptr());
    }
  });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](Matrix x, Labels y, std::vector<std::string> classes,
                       std::vector<std::string> names) {
             Dataset ds;
             ds.features = std::move(x);
             ds.labels = std::move(y);
             ds.classes = std::move(classes);
             ds.feature_names = std::move(names);
             ds.row_ids.resize(ds.labels.size());
             for (std::size_t i = 0; i < ds.row_ids.size(); ++i) ds.row_ids[i] = i;
             ds.validate();
             return ds;
           }),
           py::arg("features"), py::arg("labels"), py::arg("classes"), py::arg("feature_names"))
      .def_readonly("features", &Dataset::features)
      .def_readonly("labels", &Dataset::labels)
      .def_readonly("classes", &Dataset::classes)
      .def_readonly("feature_names", &Dataset::feature_names)
      .def_readonly("row_ids", &Dataset::row_ids)
      .def_property_readonly("num_classes", &Dataset::num_classes)
      .def("class_counts", &Dataset::class_counts)
      .def("to_csv", &dataset_to_csv)
      .def("__len__", &Dataset::size);

  py::class_<PipelineConfig>(m, "Config")
      .def_property(
          "out_dir", [](const PipelineConfig& c) { return c.out_dir.string(); },
          [](PipelineConfig& c, const std::string& p) { c.out_dir = p; })
      .def_readwrite("workers", &PipelineConfig::workers)
      .def_readwrite("folds", &PipelineConfig::folds)
      .def_readwrite("test_fraction", &PipelineConfig::test_fraction)
      .def_readwrite("ann_epochs", &PipelineConfig::ann_epochs)
      .def_readwrite("ann_variants", &PipelineConfig::ann_variants)
      .def_readwrite("learning_curves", &PipelineConfig::learning_curves)
      .def_property(
          "samples_per_class", [](const PipelineConfig& c) { return c.data.samples_per_class; },
          [](PipelineConfig& c, int n) { c.data.samples_per_class = n; })
      .def_property(
          "data_seed", [](const PipelineConfig& c) { return c.data.seed; },
          [](PipelineConfig& c, std::uint64_t s) { c.data.seed = s; })
      .def("validate", &PipelineConfig::validate)
      .def("to_ini", &PipelineConfig::to_ini);

  m.def("default_config", &default_config);
  m.def("parse_config", &parse_config, py::arg("text"), py::arg("origin") = "config");
  m.def("load_config", [](const std::string& path) { return load_config(path); }, py::arg("path"));

  m.def(
      "synth",
      [](int samples_per_class, bool drift, std::uint64_t seed, std::size_t workers) {
        SynthSpec spec = default_spec(samples_per_class);
        spec.drift.enabled = drift;
        spec.seed = seed;
        return generate(spec, std::nullopt, workers);
      },
      py::arg("samples_per_class") = 1000, py::arg("drift") = true, py::arg("seed") = 42,
      py::arg("workers") = 1);
  m.def("load_manifest", [](const std::string& p) { return load_manifest(p); });
  m.def("load_directory", [](const std::string& p) { return load_directory(p); });
  m.def("stratified_split", &stratified_split, py::arg("dataset"), py::arg("test_fraction"),
        py::arg("seed"));
  m.def(
      "feature_correlation",
      [](const Dataset& ds) {
        std::vector<std::pair<std::string, double>> out;
        for (const auto& fc : feature_target_correlation(ds)) out.emplace_back(fc.feature, fc.r);
        return out;
      },
      py::arg("dataset"));

  m.def(
      "pca",
      [](const Matrix& x, int m) {
        PcaModel model = pca_fit(x, m);
        return py::make_tuple(pca_transform(model, x), model.eigenvalues);
      },
      py::arg("x"), py::arg("components"));
  m.def(
      "lda",
      [](const Matrix& x, const Labels& y, int m) { return lda_transform(lda_fit(x, y, m), x); },
      py::arg("x"), py::arg("y"), py::arg("components"));

  py::class_<PipelineModel>(m, "Model")
      .def_property_readonly("kind", [](const PipelineModel& p) { return p.model->kind(); })
      .def_readonly("classes", &PipelineModel::classes)
      .def_property_readonly("version",
                             [](const PipelineModel& p) { return std::string(to_string(p.version.version)); })
      .def("predict_proba", &PipelineModel::predict_proba, py::arg("dataset"))
      .def(
          "predict", [](const PipelineModel& p, const Dataset& ds) { return argmax_rows(p.predict_proba(ds)); },
          py::arg("dataset"))
      .def("to_json", [](const PipelineModel& p) { return dump(p.to_json()); })
      .def_static("from_json",
                  [](const std::string& text) { return PipelineModel::from_json(nlohmann::json::parse(text)); });

  m.def(
      "fit",
      [](const Dataset& train, const std::string& family, const std::vector<std::pair<std::string, std::string>>& params,
         const std::string& version, std::size_t workers) {
        FitOptions options;
        options.workers = workers;
        return fit_pipeline(train, parse_version(version),
                            family_factory(parse_family(family), to_params(params), options));
      },
      py::arg("train"), py::arg("family"), py::arg("params") = std::vector<std::pair<std::string, std::string>>{},
      py::arg("version") = "V2", py::arg("workers") = 1);

  m.def(
      "mlp_parameter_count",
      [](const std::string& variant, int input_dim, int num_classes) {
        return mlp_parameter_count(variant_spec(variant, input_dim, num_classes));
      },
      py::arg("variant"), py::arg("input_dim"), py::arg("num_classes"));

  m.def(
      "confusion_matrix",
      [](const Labels& y_true, const Labels& y_pred, int num_classes) {
        return Confusion(confusion_matrix(y_true, y_pred, num_classes));
      },
      py::arg("y_true"), py::arg("y_pred"), py::arg("num_classes"));
  m.def(
      "evaluate",
      [](const Labels& y_true, const Matrix& proba, const std::vector<std::string>& classes) {
        return dump(evaluate_predictions(y_true, proba, classes).to_json());
      },
      py::arg("y_true"), py::arg("proba"), py::arg("classes"));
  m.def("f1_score", &f1_score, py::arg("precision"), py::arg("recall"));

  m.def(
      "run",
      [](const PipelineConfig& config, bool verbose) {
        RunResult result;
        {
          py::gil_scoped_release release;
          result = cmd_run(config, sink(verbose));
        }
        return dump(result.summary_json());
      },
      py::arg("config"), py::arg("verbose") = false);
  m.def(
      "evaluate_saved",
      [](const std::string& model_path, const PipelineConfig& config, bool verbose) {
        return dump(cmd_evaluate(model_path, config, sink(verbose)).to_json());
      },
      py::arg("model_path"), py::arg("config"), py::arg("verbose") = false);
}
