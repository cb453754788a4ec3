#include "enose/synth.hpp"

#include "enose/error.hpp"
#include "enose/parallel.hpp"
#include "enose/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace enose {

namespace {

// Coefficient of variation per gas channel. Ethanol and humidity respond
// to every substance alike and mostly add cross-sensitivity noise.
constexpr double kCv[] = {0.05, 0.05, 0.05, 0.25, 0.05, 0.05, 0.12};
constexpr double kSpoilage = 1.18;
// Spoiled samples also read co2 far less consistently.
constexpr double kSpoilScatter = 4.0;
constexpr int kCo2 = 4;

struct Profile {
  const char* name;
  double co, no2, voc, ethanol, co2, tvoc, humidity;
};

// Fresh-substance means for co, no2, voc, ethanol, co2, tvoc, humidity.
constexpr Profile kFresh[] = {
    {"apple_juice", 4.5, 0.55, 6.5, 1.5, 480.0, 420.0, 45.0},
    {"cardamom", 5.2, 0.40, 8.0, 1.5, 540.0, 700.0, 45.0},
    {"cinnamon", 6.5, 0.13, 1.5, 1.5, 780.0, 1600.0, 45.0},
    {"garlic", 3.2, 0.30, 14.0, 1.5, 700.0, 150.0, 45.0},
    {"ginger", 2.0, 0.80, 3.5, 1.5, 430.0, 900.0, 45.0},
    {"onion", 9.0, 0.20, 5.0, 1.5, 600.0, 760.0, 45.0},
};

// Spoilage raises the voc and tvoc readings of a fresh substance.
struct Spoil {
  const char* expired;
  const char* fresh;
  int first, second;
};

constexpr Spoil kSpoiled[] = {
    {"expired_apple_juice", "apple_juice", 2, 5},
    {"expired_garlic", "garlic", 2, 5},
    {"expired_ginger", "ginger", 2, 5},
    {"expired_onion", "onion", 2, 5},
};

std::vector<double> profile_values(const Profile& p) {
  return {p.co, p.no2, p.voc, p.ethanol, p.co2, p.tvoc, p.humidity};
}

double parse_number(std::string_view text, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::BadSpec, where + ": not a number '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void SynthSpec::validate() const {
  const auto c = static_cast<Eigen::Index>(classes.size());
  const auto g = static_cast<Eigen::Index>(gas_channels.size());
  if (c < 2) throw Error(ErrorCode::BadSpec, "need at least two classes");
  if (samples_per_class < 1) throw Error(ErrorCode::BadSpec, "samples_per_class must be positive");
  if (means.rows() != c || means.cols() != g || stds.rows() != c || stds.cols() != g) {
    throw Error(ErrorCode::BadSpec, "mean/std tables must be classes x gas channels");
  }
  if (!means.allFinite() || !stds.allFinite() || (stds.array() <= 0.0).any()) {
    throw Error(ErrorCode::BadSpec, "means must be finite and every sigma positive");
  }
  for (const auto& ch : gas_channels) {
    if (std::find(channels.begin(), channels.end(), ch) == channels.end()) {
      throw Error(ErrorCode::BadSpec, "gas channel '" + ch + "' missing from channel list");
    }
  }
  for (const char* ambient : {"temperature", "pressure"}) {
    if (std::find(channels.begin(), channels.end(), ambient) == channels.end()) {
      throw Error(ErrorCode::BadSpec, std::string("channel list lacks ") + ambient);
    }
  }
  if (channels.size() != gas_channels.size() + 2) {
    throw Error(ErrorCode::BadSpec, "channels must be the gas channels plus temperature and pressure");
  }
  for (double v : {drift.temperature.start, drift.temperature.end, drift.pressure.start, drift.pressure.end}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::BadSpec, "ambient ramps must be finite");
  }
  if (!(drift.temperature_jitter > 0.0) || !(drift.pressure_jitter > 0.0) ||
      !std::isfinite(drift.temperature_jitter) || !std::isfinite(drift.pressure_jitter)) {
    throw Error(ErrorCode::BadSpec, "ambient jitter must be positive");
  }
}

SynthSpec default_spec(int samples_per_class) {
  SynthSpec spec;
  spec.channels = canonical_channels();
  for (const auto& ch : spec.channels) {
    if (ch != "temperature" && ch != "pressure") spec.gas_channels.push_back(ch);
  }
  std::map<std::string, std::vector<double>> table;
  for (const auto& p : kFresh) table[p.name] = profile_values(p);
  for (const auto& s : kSpoiled) {
    auto values = table.at(s.fresh);
    values[static_cast<std::size_t>(s.first)] *= kSpoilage;
    values[static_cast<std::size_t>(s.second)] *= kSpoilage;
    table[s.expired] = values;
  }
  // std::map keeps the classes in the same sorted order as the label encoder.
  const auto g = static_cast<Eigen::Index>(spec.gas_channels.size());
  spec.means.resize(static_cast<Eigen::Index>(table.size()), g);
  spec.stds.resize(spec.means.rows(), g);
  Eigen::Index row = 0;
  for (const auto& [name, values] : table) {
    spec.classes.push_back(name);
    for (Eigen::Index j = 0; j < g; ++j) {
      spec.means(row, j) = values[static_cast<std::size_t>(j)];
      spec.stds(row, j) = kCv[j] * values[static_cast<std::size_t>(j)];
    }
    if (name.starts_with("expired_")) spec.stds(row, kCo2) *= kSpoilScatter;
    ++row;
  }
  spec.samples_per_class = samples_per_class;
  return spec;
}

double channel_separation(const SynthSpec& spec, int a, int b, int channel) {
  const double sigma = std::max(spec.stds(a, channel), spec.stds(b, channel));
  return std::abs(spec.means(a, channel) - spec.means(b, channel)) / sigma;
}

double pair_separation(const SynthSpec& spec, int a, int b) {
  std::vector<double> seps;
  for (Eigen::Index j = 0; j < spec.means.cols(); ++j) {
    seps.push_back(channel_separation(spec, a, b, static_cast<int>(j)));
  }
  std::sort(seps.begin(), seps.end(), std::greater<>());
  return seps.size() >= 2 ? seps[1] : 0.0;
}

Dataset generate(const SynthSpec& spec, std::optional<std::uint64_t> seed_override, std::size_t workers) {
  spec.validate();
  const std::uint64_t seed = seed_override.value_or(spec.seed);
  const auto c = spec.classes.size();
  const auto per_class = static_cast<std::size_t>(spec.samples_per_class);
  const std::size_t n = c * per_class;
  const auto d = static_cast<Eigen::Index>(spec.channels.size());

  std::vector<Eigen::Index> gas_column(spec.gas_channels.size());
  for (std::size_t j = 0; j < spec.gas_channels.size(); ++j) {
    gas_column[j] = std::find(spec.channels.begin(), spec.channels.end(), spec.gas_channels[j]) - spec.channels.begin();
  }
  const auto temp_col = std::find(spec.channels.begin(), spec.channels.end(), "temperature") - spec.channels.begin();
  const auto pres_col = std::find(spec.channels.begin(), spec.channels.end(), "pressure") - spec.channels.begin();

  Dataset ds;
  ds.feature_names = spec.channels;
  ds.classes = spec.classes;
  ds.features.resize(static_cast<Eigen::Index>(n), d);
  ds.labels.resize(n);
  ds.row_ids.resize(n);

  auto ramp = [&](const AmbientRamp& r, std::size_t i) {
    if (!spec.drift.enabled) return 0.5 * (r.start + r.end);
    const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    return r.start + (r.end - r.start) * t;
  };

  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, workers, [&](std::size_t chunk) {
    const std::size_t end = std::min(n, (chunk + 1) * kChunk);
    for (std::size_t i = chunk * kChunk; i < end; ++i) {
      const auto cls = static_cast<Eigen::Index>(i / per_class);
      const auto row = static_cast<Eigen::Index>(i);
      Rng rng(seed, "synth-row", i);
      for (std::size_t j = 0; j < gas_column.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        ds.features(row, gas_column[j]) = rng.normal(spec.means(cls, jj), spec.stds(cls, jj));
      }
      ds.features(row, temp_col) = ramp(spec.drift.temperature, i) + rng.normal(0.0, spec.drift.temperature_jitter);
      ds.features(row, pres_col) = ramp(spec.drift.pressure, i) + rng.normal(0.0, spec.drift.pressure_jitter);
      ds.labels[i] = static_cast<int>(cls);
      ds.row_ids[i] = i;
    }
  });
  return ds;
}

void load_profiles(SynthSpec& spec, const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw Error(ErrorCode::Io, "cannot read profile table " + csv.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::BadSpec, csv.string() + ": empty profile table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "class" || header[1] != "stat") {
    throw Error(ErrorCode::BadSpec, csv.string() + ": header must start with class,stat");
  }
  std::vector<std::string> gas(header.begin() + 2, header.end());
  std::map<std::string, std::vector<double>> means, stds;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    const auto where = csv.string() + ":" + std::to_string(line_no);
    if (cells.size() != header.size()) throw Error(ErrorCode::BadSpec, where + ": wrong cell count");
    std::vector<double> values;
    for (std::size_t j = 2; j < cells.size(); ++j) values.push_back(parse_number(cells[j], where));
    if (cells[1] == "mean") {
      means[cells[0]] = values;
    } else if (cells[1] == "std") {
      stds[cells[0]] = values;
    } else {
      throw Error(ErrorCode::BadSpec, where + ": stat must be mean or std");
    }
  }
  if (means.empty()) throw Error(ErrorCode::BadSpec, csv.string() + ": no classes");
  spec.classes.clear();
  spec.gas_channels = gas;
  spec.channels = gas;
  spec.channels.push_back("temperature");
  spec.channels.push_back("pressure");
  spec.means.resize(static_cast<Eigen::Index>(means.size()), static_cast<Eigen::Index>(gas.size()));
  spec.stds.resize(spec.means.rows(), spec.means.cols());
  Eigen::Index r = 0;
  for (const auto& [name, values] : means) {
    const auto it = stds.find(name);
    if (it == stds.end()) throw Error(ErrorCode::BadSpec, csv.string() + ": class '" + name + "' has no std row");
    spec.classes.push_back(name);
    for (std::size_t j = 0; j < gas.size(); ++j) {
      spec.means(r, static_cast<Eigen::Index>(j)) = values[j];
      spec.stds(r, static_cast<Eigen::Index>(j)) = it->second[j];
    }
    ++r;
  }
  spec.validate();
}

SynthOutput write_runs(const Dataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
  SynthOutput out;
  std::string manifest = "# path,class\n";
  char buf[32];
  for (std::size_t k = 0; k < ds.classes.size(); ++k) {
    const auto name = ds.classes[k] + "__run1.csv";
    std::string text;
    for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
      text += (j ? "," : "") + ds.feature_names[j];
    }
    text += '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.labels[i] != static_cast<int>(k)) continue;
      for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
        if (j) text += ',';
        const auto [end, err] = std::to_chars(buf, buf + sizeof buf, ds.features(static_cast<Eigen::Index>(i), j));
        text.append(buf, end);
      }
      text += '\n';
    }
    const auto path = dir / name;
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text) || !f.flush()) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.files.push_back(path);
    manifest += name + "," + ds.classes[k] + "\n";
  }
  out.manifest = dir / "manifest.csv";
  std::ofstream m(out.manifest, std::ios::binary);
  if (!m || !(m << manifest) || !m.flush()) throw Error(ErrorCode::Io, "cannot write " + out.manifest.string());
  return out;
}

}  // namespace enose
