#pragma once

#include "enose/config.hpp"
#include "enose/dataset.hpp"
#include "enose/error.hpp"
#include "enose/metrics.hpp"
#include "enose/selection.hpp"
#include "enose/synth.hpp"

#include <nlohmann/json.hpp>

#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace enose {

/// An Error raised inside a named pipeline stage. Keeps the original code
/// so the exit-code mapping still applies.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), "stage '" + stage + "': " + strip_code(cause)), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

  /// The message without its leading error-code tag.
  static std::string strip_code(const Error& e);

 private:
  std::string stage_;
};

/// 0 success, 1 validation (bad config, parameters, grids), 2 runtime or data.
int exit_code_for(const std::exception& e);

/// Loads or generates the dataset named by the config's [data] section.
Dataset load_data(const PipelineConfig& config);

/// The generator spec the config describes (sizes, drift, seed, profiles).
SynthSpec synth_spec_for(const PipelineConfig& config);

SynthOutput cmd_synth(const PipelineConfig& config, std::ostream& log);

/// Loads the configured runs and writes the merged table to
/// `<out>/dataset.csv`.
Dataset cmd_ingest(const PipelineConfig& config, std::ostream& log);

/// Writes `<out>/correlation.csv` and echoes the top and bottom features.
std::vector<FeatureCorrelation> cmd_inspect(const PipelineConfig& config, std::ostream& log);

struct ModelRecord {
  std::string name;
  std::string family;
  DatasetVersion version = DatasetVersion::V2;
  ParamSet params;
  std::optional<CvResult> cv;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double macro_f1 = 0.0;
  double micro_auc = 0.0;
  bool converged = true;
  /// "ok", or "failed: <stage>: <message>".
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

struct VersionGap {
  std::string family;
  double v1 = 0.0;
  double v2 = 0.0;
  double gap = 0.0;  // v1 - v2
};

struct RunResult {
  std::vector<ModelRecord> models;
  /// Highest test accuracy among successful models (earliest on ties).
  std::optional<std::size_t> best;
  std::vector<VersionGap> gaps;
  std::vector<GridResult> grids;
  std::vector<FeatureCorrelation> correlation;

  bool complete() const;
  const ModelRecord* find(const std::string& name) const;
  nlohmann::json summary_json() const;
  std::string summary_csv() const;
  nlohmann::json gap_json() const;
};

/// data -> split -> baselines -> grid search -> tuned models -> ensemble
/// -> neural variants -> reports. A model that fails is recorded with its
/// stage and the run continues; data and split failures abort with a
/// StageError.
RunResult cmd_run(const PipelineConfig& config, std::ostream& log);

/// Scores a saved pipeline model on the held-out split of the configured
/// data and writes its reports under `<out>/evaluate/`.
EvalReport cmd_evaluate(const std::filesystem::path& model_path, const PipelineConfig& config,
                        std::ostream& log);

}  // namespace enose
