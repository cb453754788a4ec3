#pragma once

#include "enose/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace enose {

struct AmbientRamp {
  double start = 0.0;
  double end = 0.0;
};

/// Session-scale ambient behaviour. With drift enabled the ambient channels
/// follow a linear ramp over the whole (class-blocked) session; otherwise
/// they sit at the ramp midpoint. Jitter is added in both cases.
struct DriftSpec {
  bool enabled = true;
  AmbientRamp temperature{27.0, 21.0};
  AmbientRamp pressure{1008.0, 1019.0};
  double temperature_jitter = 6.5;
  double pressure_jitter = 12.0;
};

struct SynthSpec {
  std::vector<std::string> classes;
  /// Output column order; must contain every gas channel plus
  /// "temperature" and "pressure".
  std::vector<std::string> channels;
  std::vector<std::string> gas_channels;
  /// C x g Gaussian parameters for the gas channels.
  Matrix means;
  Matrix stds;
  int samples_per_class = 10000;
  DriftSpec drift;
  std::uint64_t seed = 42;

  /// Throws BadSpec when any invariant is violated.
  void validate() const;
};

/// Ten classes, nine canonical channels. Gas readings scale with the
/// substance; spoiled samples read 18% higher on voc and tvoc and scatter
/// four times wider on co2. Ethanol and humidity carry no class signal.
SynthSpec default_spec(int samples_per_class = 10000);

/// Separation of classes a and b on one gas channel in units of the larger
/// of the two standard deviations.
double channel_separation(const SynthSpec& spec, int a, int b, int channel);

/// Second-largest channel separation: the pair differs by at least this
/// much on two channels.
double pair_separation(const SynthSpec& spec, int a, int b);

/// Rows are produced in class blocks; row i draws from the stream
/// (seed, "synth-row", i), so chunked parallel generation is exact.
Dataset generate(const SynthSpec& spec, std::optional<std::uint64_t> seed_override = std::nullopt,
                 std::size_t workers = 1);

/// Reads per-class Gaussian parameters from a CSV with header
/// `class,stat,<gas channels...>` and rows whose stat is `mean` or `std`.
void load_profiles(SynthSpec& spec, const std::filesystem::path& csv);

struct SynthOutput {
  std::vector<std::filesystem::path> files;
  std::filesystem::path manifest;
};

/// Writes `<class>__run1.csv` per class (features only) and
/// `manifest.csv` listing them in class order.
SynthOutput write_runs(const Dataset& ds, const std::filesystem::path& dir);

}  // namespace enose
