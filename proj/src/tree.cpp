#include "enose/tree.hpp"

#include "enose/error.hpp"

#include <algorithm>
#include <numeric>

namespace enose {

void TreeParams::validate() const {
  if (max_depth && *max_depth < 0) throw Error(ErrorCode::BadParameter, "max_depth must be >= 0");
  if (min_samples_split < 2) throw Error(ErrorCode::BadParameter, "min_samples_split must be >= 2");
  if (min_samples_leaf < 1) throw Error(ErrorCode::BadParameter, "min_samples_leaf must be >= 1");
}

double gini_impurity(std::span<const double> counts) {
  double n = 0.0;
  for (double c : counts) n += c;
  if (!(n > 0.0)) throw Error(ErrorCode::EmptyNode, "node has no samples");
  double sq = 0.0;
  for (double c : counts) sq += (c / n) * (c / n);
  return 1.0 - sq;
}

void Classifier::check_columns(const Matrix& x) const {
  if (x.cols() != num_features()) {
    throw Error(ErrorCode::DimensionMismatch, kind() + " expects " +
                                                  std::to_string(num_features()) +
                                                  " columns, got " + std::to_string(x.cols()));
  }
}

namespace {

/// Gains closer than this are treated as equal so that tie-breaking is
/// not decided by rounding noise.
constexpr double kGainTolerance = 1e-12;

struct Builder {
  const Matrix& x;
  const Labels& y;
  int num_classes;
  const TreeParams& params;
  int max_features;
  Rng* rng;
  std::vector<TreeNode> nodes;
  std::vector<std::pair<double, int>> scratch;
  std::vector<int> feature_order;

  int build(std::vector<std::size_t> samples, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
    for (auto i : samples) counts[static_cast<std::size_t>(y[i])] += 1.0;
    const auto n = samples.size();
    const bool pure =
        std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
    const bool depth_stop = params.max_depth && depth >= *params.max_depth;
    if (pure || depth_stop || n < static_cast<std::size_t>(params.min_samples_split) ||
        n < 2 * static_cast<std::size_t>(params.min_samples_leaf)) {
      nodes[id].counts = std::move(counts);
      return id;
    }
    const auto split = best_split(samples, counts);
    if (split.feature < 0) {
      nodes[id].counts = std::move(counts);
      return id;
    }
    std::vector<std::size_t> left, right;
    for (auto i : samples) {
      (x(static_cast<Eigen::Index>(i), split.feature) <= split.threshold ? left : right).push_back(i);
    }
    samples.clear();
    samples.shrink_to_fit();
    nodes[id].feature = split.feature;
    nodes[id].threshold = split.threshold;
    nodes[id].gain = split.gain;
    const int l = build(std::move(left), depth + 1);
    const int r = build(std::move(right), depth + 1);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
  }

  bool is_constant(const std::vector<std::size_t>& samples, int f) const {
    const double first = x(static_cast<Eigen::Index>(samples.front()), f);
    for (auto i : samples) {
      if (x(static_cast<Eigen::Index>(i), f) != first) return false;
    }
    return true;
  }

  std::vector<int> candidate_features(const std::vector<std::size_t>& samples) {
    const int d = static_cast<int>(x.cols());
    std::vector<int> chosen;
    if (max_features >= d || rng == nullptr) {
      chosen.resize(static_cast<std::size_t>(d));
      std::iota(chosen.begin(), chosen.end(), 0);
      return chosen;
    }
    // Draw features in random order until max_features non-constant ones
    // have been visited; constant features do not count toward the budget.
    feature_order.resize(static_cast<std::size_t>(d));
    std::iota(feature_order.begin(), feature_order.end(), 0);
    int visited = 0;
    for (int pos = 0; pos < d && visited < max_features; ++pos) {
      const auto pick = pos + static_cast<int>(rng->below(static_cast<std::uint64_t>(d - pos)));
      std::swap(feature_order[pos], feature_order[pick]);
      const int f = feature_order[pos];
      if (is_constant(samples, f)) continue;
      chosen.push_back(f);
      ++visited;
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  SplitChoice best_split(const std::vector<std::size_t>& samples,
                         const std::vector<double>& parent_counts) {
    const auto n = static_cast<double>(samples.size());
    double parent_sq = 0.0;
    for (double c : parent_counts) parent_sq += c * c;
    const double parent_gini = 1.0 - parent_sq / (n * n);
    const auto min_leaf = static_cast<std::size_t>(params.min_samples_leaf);

    SplitChoice best;
    best.gain = -1.0;
    std::vector<double> left(static_cast<std::size_t>(num_classes));
    std::vector<double> right(static_cast<std::size_t>(num_classes));
    for (int f : candidate_features(samples)) {
      scratch.clear();
      for (auto i : samples) scratch.emplace_back(x(static_cast<Eigen::Index>(i), f), y[i]);
      std::sort(scratch.begin(), scratch.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::fill(left.begin(), left.end(), 0.0);
      right = parent_counts;
      double left_sq = 0.0;
      double right_sq = parent_sq;
      for (std::size_t pos = 0; pos + 1 < scratch.size(); ++pos) {
        const auto c = static_cast<std::size_t>(scratch[pos].second);
        left_sq += 2.0 * left[c] + 1.0;
        right_sq -= 2.0 * right[c] - 1.0;
        left[c] += 1.0;
        right[c] -= 1.0;
        const double lo = scratch[pos].first;
        const double hi = scratch[pos + 1].first;
        if (!(lo < hi)) continue;
        const std::size_t n_left = pos + 1;
        const std::size_t n_right = scratch.size() - n_left;
        if (n_left < min_leaf || n_right < min_leaf) continue;
        const auto nl = static_cast<double>(n_left);
        const auto nr = static_cast<double>(n_right);
        const double child_gini =
            (nl / n) * (1.0 - left_sq / (nl * nl)) + (nr / n) * (1.0 - right_sq / (nr * nr));
        const double gain = parent_gini - child_gini;
        if (gain > best.gain + kGainTolerance) {
          double threshold = lo + (hi - lo) / 2.0;
          if (!(threshold < hi)) threshold = lo;
          best = {f, threshold, gain};
        }
      }
    }
    if (best.feature < 0) return {};
    best.gain = std::max(best.gain, 0.0);
    return best;
  }
};

}  // namespace

DecisionTree grow_tree(const Matrix& x, const Labels& y, int num_classes,
                       std::span<const std::size_t> samples, const TreeParams& params,
                       int max_features, Rng* rng) {
  params.validate();
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorCode::ShapeMismatch, "label count does not match rows");
  }
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "cannot grow a tree on zero samples");
  for (int label : y) {
    if (label < 0 || label >= num_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(label));
    }
  }
  Builder b{x, y, num_classes, params, max_features, rng, {}, {}, {}};
  b.build(std::vector<std::size_t>(samples.begin(), samples.end()), 0);
  return DecisionTree(std::move(b.nodes), num_classes, static_cast<int>(x.cols()));
}

DecisionTree dt_fit(const Matrix& x, const Labels& y, int num_classes, const TreeParams& params) {
  std::vector<std::size_t> all(y.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return grow_tree(x, y, num_classes, all, params, static_cast<int>(x.cols()), nullptr);
}

void DecisionTree::leaf_proba(const double* row, double* out) const {
  int id = 0;
  while (!nodes_[id].is_leaf()) {
    const auto& node = nodes_[id];
    id = row[node.feature] <= node.threshold ? node.left : node.right;
  }
  const auto& counts = nodes_[id].counts;
  double n = 0.0;
  for (double c : counts) n += c;
  for (std::size_t k = 0; k < counts.size(); ++k) out[k] = counts[k] / n;
}

Matrix DecisionTree::predict_proba(const Matrix& x) const {
  check_columns(x);
  Matrix out(x.rows(), num_classes_);
  for (Eigen::Index i = 0; i < x.rows(); ++i) leaf_proba(x.row(i).data(), out.row(i).data());
  return out;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    deepest = std::max(deepest, depth[id]);
    if (!nodes_[id].is_leaf()) {
      depth[static_cast<std::size_t>(nodes_[id].left)] = depth[id] + 1;
      depth[static_cast<std::size_t>(nodes_[id].right)] = depth[id] + 1;
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) { return n.is_leaf(); }));
}

SplitChoice DecisionTree::root_split() const {
  if (nodes_.empty() || nodes_.front().is_leaf()) return {};
  return {nodes_.front().feature, nodes_.front().threshold, nodes_.front().gain};
}

namespace {

nlohmann::json node_to_json(const std::vector<TreeNode>& nodes, int id) {
  const auto& n = nodes[static_cast<std::size_t>(id)];
  if (n.is_leaf()) return {{"counts", n.counts}};
  return {{"feature", n.feature},
          {"threshold", n.threshold},
          {"gain", n.gain},
          {"left", node_to_json(nodes, n.left)},
          {"right", node_to_json(nodes, n.right)}};
}

int node_from_json(const nlohmann::json& j, std::vector<TreeNode>& nodes) {
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  if (j.contains("counts")) {
    nodes[id].counts = j.at("counts").get<std::vector<double>>();
    return id;
  }
  nodes[id].feature = j.at("feature").get<int>();
  nodes[id].threshold = j.at("threshold").get<double>();
  nodes[id].gain = j.value("gain", 0.0);
  const int l = node_from_json(j.at("left"), nodes);
  const int r = node_from_json(j.at("right"), nodes);
  nodes[id].left = l;
  nodes[id].right = r;
  return id;
}

}  // namespace

nlohmann::json DecisionTree::to_json() const {
  return {{"format_version", kModelFormatVersion},
          {"kind", kind()},
          {"num_classes", num_classes_},
          {"num_features", num_features_},
          {"root", node_to_json(nodes_, 0)}};
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
  std::vector<TreeNode> nodes;
  node_from_json(j.at("root"), nodes);
  return DecisionTree(std::move(nodes), j.at("num_classes").get<int>(),
                      j.at("num_features").get<int>());
}

}  // namespace enose
