#include "enose/config.hpp"

#include "enose/error.hpp"
#include "enose/neural.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace enose {

namespace pt = boost::property_tree;

GridSpec default_grid(Family family) {
  GridSpec g;
  g.family = family;
  switch (family) {
    case Family::Svm:
      g.axes = {{"kernel", {"linear", "rbf"}}, {"C", {"0.1", "1", "10"}}, {"gamma", {"scale", "0.1", "1"}}};
      break;
    case Family::DecisionTree:
      g.axes = {{"max_depth", {"8", "16", "none"}}, {"min_samples_leaf", {"1", "5", "20"}}};
      break;
    case Family::RandomForest:
      g.axes = {{"n_estimators", {"50", "100", "200"}}, {"max_features", {"sqrt", "log2", "all"}}};
      break;
    case Family::Mlp:
      g.axes = {{"variant", {"baseline"}}};
      break;
  }
  return g;
}

PipelineConfig default_config() {
  PipelineConfig c;
  for (Family f : {Family::Svm, Family::DecisionTree, Family::RandomForest}) c.grids[f] = default_grid(f);
  return c;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

std::string fmt(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::string origin) : tree_(tree), origin_(std::move(origin)) {}

  const pt::ptree* section(const std::string& name) const {
    for (const auto& [key, child] : tree_) {
      if (key == name) return &child;
    }
    return nullptr;
  }

  std::optional<std::string> get(const std::string& sec, const std::string& key) const {
    const auto* s = section(sec);
    if (!s) return std::nullopt;
    for (const auto& [k, v] : *s) {
      if (k == key) return trim(v.data());
    }
    return std::nullopt;
  }

  std::string require(const std::string& sec, const std::string& key) const {
    auto v = get(sec, key);
    if (!v) fail(sec, key, "missing required key");
    return *v;
  }

  [[noreturn]] void fail(const std::string& sec, const std::string& key, const std::string& why) const {
    throw Error(ErrorCode::Config, origin_ + ": [" + sec + "] " + key + ": " + why);
  }

  double number(const std::string& sec, const std::string& key, const std::string& text) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
      fail(sec, key, "expected a number, got '" + text + "'");
    }
    return v;
  }

  long long integer(const std::string& sec, const std::string& key, const std::string& text) const {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      fail(sec, key, "expected an integer, got '" + text + "'");
    }
    return v;
  }

  bool boolean(const std::string& sec, const std::string& key, const std::string& text) const {
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
    fail(sec, key, "expected true or false, got '" + text + "'");
  }

  template <typename T, typename Parse>
  std::vector<T> list(const std::string& sec, const std::string& key, const std::string& text, Parse parse) const {
    std::vector<T> out;
    for (const auto& item : split_list(text)) {
      try {
        out.push_back(parse(item));
      } catch (const Error& e) {
        fail(sec, key, e.what());
      }
    }
    return out;
  }

 private:
  const pt::ptree& tree_;
  std::string origin_;
};

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"data", {"source", "manifest", "directory", "profiles", "samples_per_class", "drift", "seed"}},
      {"split", {"test_fraction", "seed", "folds"}},
      {"pipeline", {"version", "workers"}},
      {"models",
       {"families", "baseline_versions", "ensemble", "ann_variants", "ann_versions", "ann_epochs", "ann_batch",
        "ann_validation_fraction", "learning_curve_sizes", "learning_curves", "seed"}},
      {"output", {"dir", "formats"}},
  };
  return keys;
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::Config, origin + ": line " + std::to_string(e.line()) + ": " + e.message());
  }
  const Reader r(tree, origin);
  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty()) {
      throw Error(ErrorCode::Config, origin + ": key '" + name + "' outside any section");
    }
    if (name.rfind("grid.", 0) == 0) continue;
    const auto it = known_keys().find(name);
    if (it == known_keys().end()) throw Error(ErrorCode::Config, origin + ": unknown section [" + name + "]");
    for (const auto& [key, value] : section) {
      if (!it->second.count(key)) r.fail(name, key, "unknown key");
    }
  }

  PipelineConfig c = default_config();

  c.data.source = r.require("data", "source");
  if (c.data.source != "synth" && c.data.source != "manifest" && c.data.source != "directory") {
    r.fail("data", "source", "expected synth, manifest or directory");
  }
  if (auto v = r.get("data", "manifest")) c.data.manifest = *v;
  if (auto v = r.get("data", "directory")) c.data.directory = *v;
  if (auto v = r.get("data", "profiles")) c.data.profiles = *v;
  if (c.data.source == "manifest" && c.data.manifest.empty()) r.require("data", "manifest");
  if (c.data.source == "directory" && c.data.directory.empty()) r.require("data", "directory");
  if (auto v = r.get("data", "samples_per_class")) {
    c.data.samples_per_class = static_cast<int>(r.integer("data", "samples_per_class", *v));
  }
  if (auto v = r.get("data", "drift")) c.data.drift = r.boolean("data", "drift", *v);
  if (auto v = r.get("data", "seed")) c.data.seed = static_cast<std::uint64_t>(r.integer("data", "seed", *v));

  c.test_fraction = r.number("split", "test_fraction", r.require("split", "test_fraction"));
  c.split_seed = static_cast<std::uint64_t>(r.integer("split", "seed", r.require("split", "seed")));
  c.folds = static_cast<int>(r.integer("split", "folds", r.require("split", "folds")));

  try {
    c.version = parse_version(r.require("pipeline", "version"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    r.fail("pipeline", "version", e.what());
  }
  if (auto v = r.get("pipeline", "workers")) {
    c.workers = static_cast<std::size_t>(std::max(1LL, r.integer("pipeline", "workers", *v)));
  }

  auto family = [](const std::string& s) { return parse_family(s); };
  auto version = [](const std::string& s) { return parse_version(s); };
  if (auto v = r.get("models", "families")) c.families = r.list<Family>("models", "families", *v, family);
  if (auto v = r.get("models", "baseline_versions")) {
    c.baseline_versions = r.list<DatasetVersion>("models", "baseline_versions", *v, version);
  }
  if (auto v = r.get("models", "ensemble")) c.ensemble = r.list<Family>("models", "ensemble", *v, family);
  if (auto v = r.get("models", "ann_variants")) {
    c.ann_variants = r.list<std::string>("models", "ann_variants", *v, [](const std::string& s) {
      parse_variant(s);
      return s;
    });
  }
  if (auto v = r.get("models", "ann_versions")) {
    c.ann_versions = r.list<DatasetVersion>("models", "ann_versions", *v, version);
  }
  if (auto v = r.get("models", "ann_epochs")) c.ann_epochs = static_cast<int>(r.integer("models", "ann_epochs", *v));
  if (auto v = r.get("models", "ann_batch")) c.ann_batch = static_cast<int>(r.integer("models", "ann_batch", *v));
  if (auto v = r.get("models", "ann_validation_fraction")) {
    c.ann_validation_fraction = r.number("models", "ann_validation_fraction", *v);
  }
  if (auto v = r.get("models", "learning_curve_sizes")) {
    c.learning_curve_sizes = r.list<double>("models", "learning_curve_sizes", *v, [&](const std::string& s) {
      return r.number("models", "learning_curve_sizes", s);
    });
  }
  if (auto v = r.get("models", "learning_curves")) c.learning_curves = r.boolean("models", "learning_curves", *v);
  if (auto v = r.get("models", "seed")) c.model_seed = static_cast<std::uint64_t>(r.integer("models", "seed", *v));

  for (const auto& [name, section] : tree) {
    if (name.rfind("grid.", 0) != 0) continue;
    Family f;
    try {
      f = parse_family(name.substr(5));
    } catch (const Error&) {
      throw Error(ErrorCode::Config, origin + ": unknown grid section [" + name + "]");
    }
    GridSpec g;
    g.family = f;
    for (const auto& [key, value] : section) {
      auto values = split_list(value.data());
      if (values.empty()) r.fail(name, key, "empty value list");
      g.axes.emplace_back(key, std::move(values));
    }
    if (g.axes.empty()) throw Error(ErrorCode::Config, origin + ": [" + name + "] has no axes");
    c.grids[f] = std::move(g);
  }

  c.out_dir = r.require("output", "dir");
  if (auto v = r.get("output", "formats")) {
    c.formats.clear();
    for (const auto& f : split_list(*v)) {
      if (f != "json" && f != "csv" && f != "svg") r.fail("output", "formats", "unknown format '" + f + "'");
      c.formats.insert(f);
    }
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Config, "cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto c = parse_config(buf.str(), path.string());
  // Relative data paths resolve against the config file's directory.
  const auto base = path.parent_path();
  for (auto* p : {&c.data.manifest, &c.data.directory, &c.data.profiles}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
  }
  return c;
}

void PipelineConfig::validate() const {
  auto bad = [](const std::string& where, const std::string& why) {
    throw Error(ErrorCode::Config, where + ": " + why);
  };
  if (data.samples_per_class < 1) bad("[data] samples_per_class", "must be at least 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) bad("[split] test_fraction", "must lie in (0, 1)");
  if (folds < 2) bad("[split] folds", "must be at least 2");
  if (ann_epochs < 1) bad("[models] ann_epochs", "must be at least 1");
  if (ann_batch < 1) bad("[models] ann_batch", "must be at least 1");
  if (!(ann_validation_fraction > 0.0 && ann_validation_fraction < 1.0)) {
    bad("[models] ann_validation_fraction", "must lie in (0, 1)");
  }
  for (std::size_t i = 0; i < learning_curve_sizes.size(); ++i) {
    const double s = learning_curve_sizes[i];
    if (!(s > 0.0 && s <= 1.0) || (i > 0 && !(s > learning_curve_sizes[i - 1]))) {
      bad("[models] learning_curve_sizes", "must be strictly ascending in (0, 1]");
    }
  }
  for (Family f : families) {
    if (f == Family::Mlp) bad("[models] families", "mlp is configured through ann_variants");
  }
  for (Family f : ensemble) {
    if (f == Family::Mlp) bad("[models] ensemble", "members must be svm, dt or rf");
    if (std::find(families.begin(), families.end(), f) == families.end()) {
      bad("[models] ensemble", "member '" + std::string(to_string(f)) + "' is not among the tuned families");
    }
  }
  if (!ensemble.empty() && ensemble.size() < 2) bad("[models] ensemble", "needs at least two members");
  if (formats.empty()) bad("[output] formats", "no format selected");
}

std::string PipelineConfig::to_ini() const {
  std::ostringstream out;
  auto versions = [](const std::vector<DatasetVersion>& vs) {
    std::vector<std::string> s;
    for (auto v : vs) s.emplace_back(to_string(v));
    return join(s);
  };
  auto fams = [](const std::vector<Family>& fs) {
    std::vector<std::string> s;
    for (auto f : fs) s.emplace_back(to_string(f));
    return join(s);
  };
  std::vector<std::string> sizes;
  for (double s : learning_curve_sizes) sizes.push_back(fmt(s));
  out << "[data]\nsource = " << data.source << '\n';
  if (!data.manifest.empty()) out << "manifest = " << data.manifest.string() << '\n';
  if (!data.directory.empty()) out << "directory = " << data.directory.string() << '\n';
  if (!data.profiles.empty()) out << "profiles = " << data.profiles.string() << '\n';
  out << "samples_per_class = " << data.samples_per_class << '\n'
      << "drift = " << (data.drift ? "true" : "false") << '\n'
      << "seed = " << data.seed << "\n\n"
      << "[split]\ntest_fraction = " << fmt(test_fraction) << "\nseed = " << split_seed << "\nfolds = " << folds
      << "\n\n"
      << "[pipeline]\nversion = " << to_string(version) << "\n\n"
      << "[models]\nfamilies = " << fams(families) << "\nbaseline_versions = " << versions(baseline_versions)
      << "\nensemble = " << fams(ensemble) << "\nann_variants = " << join(ann_variants)
      << "\nann_versions = " << versions(ann_versions) << "\nann_epochs = " << ann_epochs
      << "\nann_batch = " << ann_batch << "\nann_validation_fraction = " << fmt(ann_validation_fraction)
      << "\nlearning_curve_sizes = " << join(sizes) << "\nlearning_curves = " << (learning_curves ? "true" : "false")
      << "\nseed = " << model_seed << "\n\n";
  for (const auto& [family, grid] : grids) {
    out << "[grid." << to_string(family) << "]\n";
    for (const auto& [name, values] : grid.axes) out << name << " = " << join(values) << '\n';
    out << '\n';
  }
  std::vector<std::string> f(formats.begin(), formats.end());
  out << "[output]\ndir = " << out_dir.string() << "\nformats = " << join(f) << '\n';
  return out.str();
}

}  // namespace enose
