#include "enose/dataset.hpp"

#include "enose/error.hpp"
#include "enose/preprocess.hpp"
#include "enose/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

namespace enose {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('\n', start);
    const auto end = pos == std::string_view::npos ? text.size() : pos;
    lines.push_back(trim(text.substr(start, end - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(classes.size(), 0);
  for (int y : labels) ++counts.at(static_cast<std::size_t>(y));
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.feature_names = feature_names;
  out.classes = classes;
  out.features = select_rows(features, indices);
  out.labels.reserve(indices.size());
  out.row_ids.reserve(indices.size());
  for (auto i : indices) {
    out.labels.push_back(labels.at(i));
    out.row_ids.push_back(row_ids.empty() ? i : row_ids.at(i));
  }
  return out;
}

Dataset Dataset::with_features(std::vector<std::string> names, Matrix x) const {
  Dataset out;
  out.feature_names = std::move(names);
  out.features = std::move(x);
  out.labels = labels;
  out.classes = classes;
  out.row_ids = row_ids;
  return out;
}

void Dataset::validate() const {
  if (features.rows() != static_cast<Eigen::Index>(labels.size()) ||
      features.cols() != static_cast<Eigen::Index>(feature_names.size())) {
    throw Error(ErrorCode::ShapeMismatch, "feature matrix does not match labels/names");
  }
  std::vector<bool> seen(classes.size(), false);
  for (int y : labels) {
    if (y < 0 || y >= num_classes()) {
      throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(y));
    }
    seen[static_cast<std::size_t>(y)] = true;
  }
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) throw Error(ErrorCode::EmptyInput, "class '" + classes[c] + "' has no samples");
  }
  if (!features.allFinite()) throw Error(ErrorCode::MalformedCell, "non-finite feature value");
}

RunTable parse_run_csv(std::string_view text, const std::string& label) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front().empty()) {
    throw Error(ErrorCode::EmptyRun, "missing header (run '" + label + "')");
  }
  auto header = split_commas(lines.front());
  std::optional<std::size_t> target_col;
  RunTable run;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "target") {
      target_col = c;
    } else {
      run.feature_names.emplace_back(header[c]);
    }
  }
  const std::size_t width = header.size();
  const std::size_t d = run.feature_names.size();
  std::size_t n = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) n += lines[i].empty() ? 0 : 1;
  if (n == 0) throw Error(ErrorCode::EmptyRun, "run '" + label + "' has no data rows");

  run.rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::string in_file_label;
  std::size_t row = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cells = split_commas(lines[i]);
    if (cells.size() != width) throw RaggedRowError(row + 1);
    std::size_t out_col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (target_col && c == *target_col) {
        if (row == 0) {
          in_file_label = std::string(cells[c]);
        } else if (cells[c] != in_file_label) {
          throw Error(ErrorCode::LabelConflict,
                      "row " + std::to_string(row + 1) + " changes the target label");
        }
        continue;
      }
      double value = 0.0;
      const auto cell = cells[c];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() ||
          !std::isfinite(value)) {
        throw MalformedCellError(row + 1, c + 1, std::string(cell));
      }
      run.rows(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(out_col++)) = value;
    }
    ++row;
  }
  if (target_col) {
    if (!label.empty() && label != in_file_label) {
      throw Error(ErrorCode::LabelConflict,
                  "target column '" + in_file_label + "' disagrees with '" + label + "'");
    }
    run.label = in_file_label;
  } else {
    run.label = label;
  }
  if (run.label.empty()) throw Error(ErrorCode::EmptyInput, "run has no class label");
  return run;
}

Dataset merge_runs(const std::vector<RunTable>& tables) {
  if (tables.empty()) throw Error(ErrorCode::EmptyInput, "no runs to merge");
  const auto& names = tables.front().feature_names;
  std::vector<std::string> labels;
  Eigen::Index total = 0;
  for (const auto& t : tables) {
    if (t.feature_names != names) {
      throw Error(ErrorCode::SchemaMismatch, "run '" + t.label + "' has a different header");
    }
    labels.push_back(t.label);
    total += t.rows.rows();
  }
  const auto encoder = encode_labels(labels);
  Dataset ds;
  ds.feature_names = names;
  ds.classes = encoder.classes();
  ds.features.resize(total, static_cast<Eigen::Index>(names.size()));
  ds.labels.reserve(static_cast<std::size_t>(total));
  Eigen::Index offset = 0;
  for (const auto& t : tables) {
    ds.features.middleRows(offset, t.rows.rows()) = t.rows;
    offset += t.rows.rows();
    ds.labels.insert(ds.labels.end(), static_cast<std::size_t>(t.rows.rows()),
                     encoder.encode(t.label));
  }
  ds.row_ids.resize(ds.labels.size());
  std::iota(ds.row_ids.begin(), ds.row_ids.end(), std::size_t{0});
  return ds;
}

std::string label_from_filename(const std::filesystem::path& path) {
  const auto stem = path.stem().string();
  const auto pos = stem.find("__");
  if (pos == std::string::npos || pos == 0) return {};
  return stem.substr(0, pos);
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest) {
  const auto text = read_text(manifest);
  const auto base = manifest.parent_path();
  std::vector<ManifestEntry> entries;
  std::size_t line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_commas(line);
    if (cells.size() != 2 || cells[0].empty() || cells[1].empty()) {
      throw Error(ErrorCode::Format, manifest.string() + ":" + std::to_string(line_no) +
                                         ": expected '<path>,<class_name>'");
    }
    std::filesystem::path p{std::string(cells[0])};
    if (p.is_relative()) p = base / p;
    entries.push_back({p, std::string(cells[1])});
  }
  return entries;
}

RunTable read_run_file(const std::filesystem::path& path, const std::string& label) {
  const auto text = read_text(path);
  auto effective = label.empty() ? label_from_filename(path) : label;
  try {
    return parse_run_csv(text, effective);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

Dataset load_manifest(const std::filesystem::path& manifest) {
  const auto entries = read_manifest(manifest);
  if (entries.empty()) throw Error(ErrorCode::EmptyInput, "manifest " + manifest.string() + " is empty");
  std::vector<RunTable> runs;
  runs.reserve(entries.size());
  for (const auto& e : entries) runs.push_back(read_run_file(e.path, e.label));
  return merge_runs(runs);
}

Dataset load_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::Io, dir.string() + " is not a directory");
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".csv" && !label_from_filename(entry.path()).empty()) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::EmptyInput, "no run files in " + dir.string());
  std::vector<RunTable> runs;
  for (const auto& f : files) runs.push_back(read_run_file(f));
  return merge_runs(runs);
}

std::string dataset_to_csv(const Dataset& ds) {
  std::string out;
  for (const auto& name : ds.feature_names) out += name + ",";
  out += "target\n";
  char buf[32];
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
      const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, ds.features(i, j));
      out.append(buf, end);
      out += ',';
    }
    out += ds.classes[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])];
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::vector<std::size_t>> indices_by_class(const Labels& labels, int num_classes) {
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= num_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(y));
    }
    by_class[static_cast<std::size_t>(y)].push_back(i);
  }
  return by_class;
}

int infer_num_classes(const Labels& labels) {
  int c = 0;
  for (int y : labels) c = std::max(c, y + 1);
  return c;
}

}  // namespace

SplitIndices stratified_split_indices(const Labels& labels, int num_classes,
                                      double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidFraction, "test fraction must lie in (0, 1)");
  }
  auto by_class = indices_by_class(labels, num_classes);
  SplitIndices out;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.size() < 2) {
      throw Error(ErrorCode::ClassTooSmall,
                  "class " + std::to_string(c) + " has fewer than 2 samples");
    }
    Rng rng(seed, "split", c);
    rng.shuffle(std::span(members));
    const auto n_test = static_cast<std::size_t>(
        std::floor(static_cast<double>(members.size()) * test_fraction + 0.5 + 1e-9));
    out.test.insert(out.test.end(), members.begin(),
                    members.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.insert(out.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test),
                     members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed) {
  const auto idx = stratified_split_indices(ds.labels, ds.num_classes(), test_fraction, seed);
  return {ds.subset(idx.train), ds.subset(idx.test)};
}

FoldPlan stratified_kfold(const Labels& labels, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::BadK, "k must be at least 2");
  auto by_class = indices_by_class(labels, infer_num_classes(labels));
  FoldPlan plan;
  plan.seed = seed;
  plan.folds.resize(static_cast<std::size_t>(k));
  std::vector<std::vector<std::size_t>> validation(static_cast<std::size_t>(k));
  std::size_t position = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() < static_cast<std::size_t>(k)) {
      throw Error(ErrorCode::TooFewPerClass, "class " + std::to_string(c) + " has " +
                                                 std::to_string(members.size()) +
                                                 " samples for k=" + std::to_string(k));
    }
    Rng rng(seed, "kfold", c);
    rng.shuffle(std::span(members));
    for (auto i : members) validation[position++ % static_cast<std::size_t>(k)].push_back(i);
  }
  std::vector<int> fold_of(labels.size(), -1);
  for (std::size_t f = 0; f < validation.size(); ++f) {
    std::sort(validation[f].begin(), validation[f].end());
    for (auto i : validation[f]) fold_of[i] = static_cast<int>(f);
  }
  for (std::size_t f = 0; f < validation.size(); ++f) {
    auto& fold = plan.folds[f];
    fold.validation = validation[f];
    fold.train.reserve(labels.size() - fold.validation.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (fold_of[i] != static_cast<int>(f)) fold.train.push_back(i);
    }
  }
  return plan;
}

}  // namespace enose
