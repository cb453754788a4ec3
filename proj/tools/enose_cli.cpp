// enose: command-line front end for the sensor-fusion pipeline.
//
//   enose [global flags] synth | ingest | inspect | run | evaluate <model.json>
//
// Flags override the matching config keys. Exit status: 0 success,
// 1 validation error, 2 runtime or data error.

#include "enose/config.hpp"
#include "enose/error.hpp"
#include "enose/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> version;
  std::optional<int> samples;
  std::optional<std::string> out;
  std::vector<std::string> formats;
  std::optional<std::size_t> workers;
};

enose::PipelineConfig resolve(const Overrides& o) {
  auto config = o.config_path.empty() ? enose::default_config() : enose::load_config(o.config_path);
  if (o.seed) config.data.seed = *o.seed;
  if (o.version) {
    try {
      config.version = enose::parse_version(*o.version);
    } catch (const enose::Error& e) {
      throw enose::Error(enose::ErrorCode::Config, std::string("--version: ") + e.what());
    }
  }
  if (o.samples) config.data.samples_per_class = *o.samples;
  if (o.out) config.out_dir = *o.out;
  if (!o.formats.empty()) config.formats = {o.formats.begin(), o.formats.end()};
  if (o.workers) config.workers = *o.workers;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electronic-nose classification toolkit"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "generator seed ([data] seed)");
  app.add_option("--version", o.version, "feature configuration for tuning (V1-V4)");
  app.add_option("--samples", o.samples, "synthetic samples per class")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "output directory");
  app.add_option("--format", o.formats, "report formats (repeatable)")
      ->check(CLI::IsMember({"json", "csv", "svg"}));
  app.add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);

  auto* synth = app.add_subcommand("synth", "write synthetic run files and a manifest");
  auto* ingest = app.add_subcommand("ingest", "load run files and write the merged dataset");
  auto* inspect = app.add_subcommand("inspect", "rank features by correlation with the label");
  auto* run = app.add_subcommand("run", "full pipeline: tune, fit, evaluate, report");
  auto* evaluate = app.add_subcommand("evaluate", "score a saved model on the held-out split");
  std::string model_path;
  evaluate->add_option("model", model_path, "model JSON written by run")->required()->check(CLI::ExistingFile);
  for (auto* sub : {synth, ingest, inspect, run, evaluate}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto config = resolve(o);
    if (synth->parsed()) {
      enose::cmd_synth(config, std::cout);
    } else if (ingest->parsed()) {
      enose::cmd_ingest(config, std::cout);
    } else if (inspect->parsed()) {
      enose::cmd_inspect(config, std::cout);
    } else if (run->parsed()) {
      const auto result = enose::cmd_run(config, std::cerr);
      std::cout << result.summary_csv();
      if (!result.complete()) {
        std::cerr << "enose: run finished with failed models (see status.json)\n";
        return 2;
      }
    } else if (evaluate->parsed()) {
      enose::cmd_evaluate(model_path, config, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "enose: " << e.what() << '\n';
    return enose::exit_code_for(e);
  }
  return 0;
}
