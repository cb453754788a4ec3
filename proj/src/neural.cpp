#include "enose/neural.hpp"

#include "enose/error.hpp"
#include "enose/json_util.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace enose {

void MlpSpec::validate() const {
  if (input_dim < 1) throw Error(ErrorCode::BadSpec, "input_dim must be >= 1");
  if (num_classes < 2) throw Error(ErrorCode::BadSpec, "num_classes must be >= 2");
  for (int w : hidden_sizes) {
    if (w < 1) throw Error(ErrorCode::BadSpec, "hidden layer widths must be >= 1");
  }
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::BadSpec, "noise_sigma must be >= 0");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw Error(ErrorCode::BadSpec, "dropout_p must lie in [0, 1)");
  }
  if (!(l2_lambda >= 0.0)) throw Error(ErrorCode::BadSpec, "l2_lambda must be >= 0");
  if (epochs < 0) throw Error(ErrorCode::BadSpec, "epochs must be >= 0");
  if (batch_size < 1) throw Error(ErrorCode::BadSpec, "batch_size must be >= 1");
  if (!(bn_momentum >= 0.0 && bn_momentum < 1.0)) {
    throw Error(ErrorCode::BadSpec, "bn_momentum must lie in [0, 1)");
  }
  if (!(bn_eps > 0.0)) throw Error(ErrorCode::BadSpec, "bn_eps must be > 0");
}

nlohmann::json MlpSpec::to_json() const {
  nlohmann::json opt;
  if (const auto* a = std::get_if<AdamConfig>(&optimizer)) {
    opt = {{"name", "adam"}, {"lr", a->lr}, {"beta1", a->beta1}, {"beta2", a->beta2}, {"eps", a->eps}};
  } else {
    const auto& r = std::get<RmspropConfig>(optimizer);
    opt = {{"name", "rmsprop"}, {"lr", r.lr}, {"rho", r.rho}, {"eps", r.eps}};
  }
  return {{"input_dim", input_dim},     {"num_classes", num_classes},
          {"hidden_sizes", hidden_sizes}, {"noise_sigma", noise_sigma},
          {"dropout_p", dropout_p},     {"use_batchnorm", use_batchnorm},
          {"l2_lambda", l2_lambda},     {"optimizer", opt},
          {"epochs", epochs},           {"batch_size", batch_size},
          {"seed", seed},               {"bn_momentum", bn_momentum},
          {"bn_eps", bn_eps}};
}

MlpSpec MlpSpec::from_json(const nlohmann::json& j) {
  MlpSpec s;
  s.input_dim = j.at("input_dim").get<int>();
  s.num_classes = j.at("num_classes").get<int>();
  s.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
  s.noise_sigma = j.at("noise_sigma").get<double>();
  s.dropout_p = j.at("dropout_p").get<double>();
  s.use_batchnorm = j.at("use_batchnorm").get<bool>();
  s.l2_lambda = j.at("l2_lambda").get<double>();
  const auto& opt = j.at("optimizer");
  if (opt.at("name") == "adam") {
    s.optimizer = AdamConfig{opt.at("lr").get<double>(), opt.at("beta1").get<double>(),
                             opt.at("beta2").get<double>(), opt.at("eps").get<double>()};
  } else {
    s.optimizer = RmspropConfig{opt.at("lr").get<double>(), opt.at("rho").get<double>(),
                                opt.at("eps").get<double>()};
  }
  s.epochs = j.at("epochs").get<int>();
  s.batch_size = j.at("batch_size").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.bn_momentum = j.at("bn_momentum").get<double>();
  s.bn_eps = j.at("bn_eps").get<double>();
  return s;
}

std::string_view to_string(MlpVariant v) {
  switch (v) {
    case MlpVariant::Baseline: return "baseline";
    case MlpVariant::Deeper: return "deeper";
    case MlpVariant::Wider: return "wider";
    case MlpVariant::L2: return "l2";
    case MlpVariant::Rmsprop: return "rmsprop";
  }
  return "baseline";
}

MlpVariant parse_variant(std::string_view name) {
  for (auto v : all_variants()) {
    if (to_string(v) == name) return v;
  }
  throw Error(ErrorCode::UnknownVariant, "unknown ANN variant '" + std::string(name) + "'");
}

const std::vector<MlpVariant>& all_variants() {
  static const std::vector<MlpVariant> v = {MlpVariant::Baseline, MlpVariant::Deeper,
                                            MlpVariant::Wider, MlpVariant::L2,
                                            MlpVariant::Rmsprop};
  return v;
}

MlpSpec variant_spec(MlpVariant variant, int input_dim, int num_classes) {
  MlpSpec s;
  s.input_dim = input_dim;
  s.num_classes = num_classes;
  s.hidden_sizes = {128, 64, 32};
  s.noise_sigma = 0.1;
  s.dropout_p = 0.2;
  s.use_batchnorm = true;
  s.optimizer = AdamConfig{};
  s.epochs = 50;
  s.batch_size = 128;
  switch (variant) {
    case MlpVariant::Baseline: break;
    case MlpVariant::Deeper: s.hidden_sizes = {128, 64, 32, 32, 16}; break;
    case MlpVariant::Wider: s.hidden_sizes = {512, 256, 128}; break;
    case MlpVariant::L2: s.l2_lambda = 1e-4; break;
    case MlpVariant::Rmsprop: s.optimizer = RmspropConfig{1e-3, 0.9, 1e-7}; break;
  }
  return s;
}

MlpSpec variant_spec(std::string_view name, int input_dim, int num_classes) {
  return variant_spec(parse_variant(name), input_dim, num_classes);
}

std::size_t mlp_parameter_count(const MlpSpec& spec) {
  std::size_t total = 0;
  int in = spec.input_dim;
  for (int w : spec.hidden_sizes) {
    total += static_cast<std::size_t>(in) * w + w;
    if (spec.use_batchnorm) total += 4 * static_cast<std::size_t>(w);
    in = w;
  }
  total += static_cast<std::size_t>(in) * spec.num_classes + spec.num_classes;
  return total;
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  int in = spec_.input_dim;
  auto add_dense = [&](int out) {
    dense_.push_back({Eigen::MatrixXd::Zero(in, out), RowVector::Zero(out)});
    in = out;
  };
  for (int w : spec_.hidden_sizes) {
    add_dense(w);
    if (spec_.use_batchnorm) {
      bn_.push_back({RowVector::Ones(w), RowVector::Zero(w), RowVector::Zero(w), RowVector::Ones(w)});
    }
  }
  add_dense(spec_.num_classes);
}

std::size_t Mlp::parameter_count() const {
  std::size_t total = 0;
  for (const auto& d : dense_) total += static_cast<std::size_t>(d.weights.size() + d.bias.size());
  for (const auto& b : bn_) {
    total += static_cast<std::size_t>(b.gamma.size() + b.beta.size() + b.running_mean.size() +
                                      b.running_var.size());
  }
  return total;
}

Mlp mlp_build(const MlpSpec& spec) {
  Mlp model(spec);
  for (std::size_t l = 0; l < model.dense_layers().size(); ++l) {
    auto& w = model.dense_layers()[l].weights;
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    Rng rng(spec.seed, "mlp-init", l);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-limit, limit);
    }
  }
  return model;
}

std::vector<double> Mlp::trainable_parameters() const {
  std::vector<double> out;
  const auto hidden = spec_.hidden_sizes.size();
  for (std::size_t l = 0; l < dense_.size(); ++l) {
    const auto& d = dense_[l];
    for (Eigen::Index r = 0; r < d.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < d.weights.cols(); ++c) out.push_back(d.weights(r, c));
    }
    for (Eigen::Index c = 0; c < d.bias.size(); ++c) out.push_back(d.bias[c]);
    if (l < hidden && spec_.use_batchnorm) {
      for (Eigen::Index c = 0; c < bn_[l].gamma.size(); ++c) out.push_back(bn_[l].gamma[c]);
      for (Eigen::Index c = 0; c < bn_[l].beta.size(); ++c) out.push_back(bn_[l].beta[c]);
    }
  }
  return out;
}

void Mlp::set_trainable_parameters(std::span<const double> values) {
  std::size_t pos = 0;
  auto next = [&]() -> double {
    if (pos >= values.size()) throw Error(ErrorCode::DimensionMismatch, "too few parameters");
    return values[pos++];
  };
  const auto hidden = spec_.hidden_sizes.size();
  for (std::size_t l = 0; l < dense_.size(); ++l) {
    auto& d = dense_[l];
    for (Eigen::Index r = 0; r < d.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < d.weights.cols(); ++c) d.weights(r, c) = next();
    }
    for (Eigen::Index c = 0; c < d.bias.size(); ++c) d.bias[c] = next();
    if (l < hidden && spec_.use_batchnorm) {
      for (Eigen::Index c = 0; c < bn_[l].gamma.size(); ++c) bn_[l].gamma[c] = next();
      for (Eigen::Index c = 0; c < bn_[l].beta.size(); ++c) bn_[l].beta[c] = next();
    }
  }
  if (pos != values.size()) throw Error(ErrorCode::DimensionMismatch, "too many parameters");
}

void Mlp::zero_parameters() {
  std::vector<double> zeros(trainable_parameters().size(), 0.0);
  set_trainable_parameters(zeros);
}

namespace {

struct LayerCache {
  Matrix input;       // a
  Matrix xhat;        // normalized pre-activation (batchnorm only)
  RowVector inv_std;  // batchnorm only
  Matrix activated;   // after scale/shift (or z) -- sign decides ReLU mask
  Matrix dropout_mask;
};

}  // namespace

double Mlp::loss(const Matrix& x, std::span<const int> y, const ForwardMode& mode,
                 std::vector<double>* gradient, Rng* rng) {
  if (x.cols() != spec_.input_dim) {
    throw Error(ErrorCode::DimensionMismatch, "MLP expects " + std::to_string(spec_.input_dim) +
                                                  " columns, got " + std::to_string(x.cols()));
  }
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorCode::ShapeMismatch, "label count does not match rows");
  }
  if ((mode.noise && spec_.noise_sigma > 0.0) || (mode.dropout && spec_.dropout_p > 0.0)) {
    if (rng == nullptr) throw Error(ErrorCode::BadParameter, "noise/dropout need a random stream");
  }
  const auto n = x.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto hidden = spec_.hidden_sizes.size();
  std::vector<LayerCache> cache(hidden);

  Matrix a = x;
  if (mode.noise && spec_.noise_sigma > 0.0) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) += spec_.noise_sigma * rng->normal();
    }
  }
  for (std::size_t l = 0; l < hidden; ++l) {
    auto& c = cache[l];
    c.input = a;
    Matrix z = (a * dense_[l].weights).rowwise() + dense_[l].bias;
    if (spec_.use_batchnorm) {
      auto& bn = bn_[l];
      RowVector mean, var;
      if (mode.batch_stats) {
        mean = z.colwise().mean();
        var = (z.rowwise() - mean).array().square().colwise().sum().matrix() * inv_n;
        if (mode.update_running) {
          bn.running_mean = spec_.bn_momentum * bn.running_mean + (1.0 - spec_.bn_momentum) * mean;
          bn.running_var = spec_.bn_momentum * bn.running_var + (1.0 - spec_.bn_momentum) * var;
        }
      } else {
        mean = bn.running_mean;
        var = bn.running_var;
      }
      c.inv_std = (var.array() + spec_.bn_eps).rsqrt().matrix();
      c.xhat = (z.rowwise() - mean).array().rowwise() * c.inv_std.array();
      z = (c.xhat.array().rowwise() * bn.gamma.array()).matrix().rowwise() + bn.beta;
    }
    c.activated = z;
    a = z.cwiseMax(0.0);
    if (mode.dropout && spec_.dropout_p > 0.0) {
      const double keep = 1.0 - spec_.dropout_p;
      c.dropout_mask.resize(a.rows(), a.cols());
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
          c.dropout_mask(i, j) = rng->uniform() < keep ? 1.0 / keep : 0.0;
        }
      }
      a = a.cwiseProduct(c.dropout_mask);
    }
  }
  const auto& out_layer = dense_.back();
  const Matrix logits = (a * out_layer.weights).rowwise() + out_layer.bias;
  Matrix proba(logits.rows(), logits.cols());
  double data_loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double top = logits.row(i).maxCoeff();
    double total = 0.0;
    for (Eigen::Index k = 0; k < logits.cols(); ++k) total += std::exp(logits(i, k) - top);
    const double log_total = std::log(total);
    for (Eigen::Index k = 0; k < logits.cols(); ++k) {
      proba(i, k) = std::exp(logits(i, k) - top - log_total);
    }
    const int label = y[static_cast<std::size_t>(i)];
    if (label < 0 || label >= spec_.num_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(label));
    }
    data_loss -= logits(i, label) - top - log_total;
  }
  data_loss *= inv_n;
  double penalty = 0.0;
  if (spec_.l2_lambda > 0.0) {
    for (const auto& d : dense_) penalty += d.weights.squaredNorm();
    penalty *= spec_.l2_lambda;
  }
  if (gradient == nullptr) return data_loss + penalty;

  // Backward pass. Gradients are collected per layer, then flattened in the
  // same order as trainable_parameters().
  std::vector<Eigen::MatrixXd> grad_w(dense_.size());
  std::vector<RowVector> grad_b(dense_.size());
  std::vector<RowVector> grad_gamma(bn_.size());
  std::vector<RowVector> grad_beta(bn_.size());

  Matrix delta = proba;
  for (Eigen::Index i = 0; i < n; ++i) delta(i, y[static_cast<std::size_t>(i)]) -= 1.0;
  delta *= inv_n;
  grad_w.back() = a.transpose() * delta;
  grad_b.back() = delta.colwise().sum();
  Matrix upstream = delta * out_layer.weights.transpose();
  for (std::size_t li = hidden; li-- > 0;) {
    auto& c = cache[li];
    if (mode.dropout && spec_.dropout_p > 0.0) upstream = upstream.cwiseProduct(c.dropout_mask);
    Matrix d_act = (c.activated.array() > 0.0).select(upstream, 0.0);
    Matrix dz;
    if (spec_.use_batchnorm) {
      auto& bn = bn_[li];
      grad_gamma[li] = d_act.cwiseProduct(c.xhat).colwise().sum();
      grad_beta[li] = d_act.colwise().sum();
      const Matrix dxhat = d_act.array().rowwise() * bn.gamma.array();
      if (mode.batch_stats) {
        const RowVector sum_dxhat = dxhat.colwise().sum();
        const RowVector sum_dxhat_xhat = dxhat.cwiseProduct(c.xhat).colwise().sum();
        dz = ((static_cast<double>(n) * dxhat).rowwise() - sum_dxhat -
              (c.xhat.array().rowwise() * sum_dxhat_xhat.array()).matrix());
        dz = (dz.array().rowwise() * (c.inv_std.array() * inv_n)).matrix();
      } else {
        dz = dxhat.array().rowwise() * c.inv_std.array();
      }
    } else {
      dz = d_act;
    }
    grad_w[li] = c.input.transpose() * dz;
    grad_b[li] = dz.colwise().sum();
    if (li > 0) upstream = dz * dense_[li].weights.transpose();
  }
  if (spec_.l2_lambda > 0.0) {
    for (std::size_t l = 0; l < dense_.size(); ++l) {
      grad_w[l] += 2.0 * spec_.l2_lambda * dense_[l].weights;
    }
  }
  gradient->clear();
  for (std::size_t l = 0; l < dense_.size(); ++l) {
    for (Eigen::Index r = 0; r < grad_w[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < grad_w[l].cols(); ++c) gradient->push_back(grad_w[l](r, c));
    }
    for (Eigen::Index c = 0; c < grad_b[l].size(); ++c) gradient->push_back(grad_b[l][c]);
    if (l < hidden && spec_.use_batchnorm) {
      for (Eigen::Index c = 0; c < grad_gamma[l].size(); ++c) gradient->push_back(grad_gamma[l][c]);
      for (Eigen::Index c = 0; c < grad_beta[l].size(); ++c) gradient->push_back(grad_beta[l][c]);
    }
  }
  return data_loss + penalty;
}

std::vector<Matrix> Mlp::normalized_preactivations(const Matrix& x) const {
  std::vector<Matrix> out;
  Matrix a = x;
  for (std::size_t l = 0; l < spec_.hidden_sizes.size(); ++l) {
    Matrix z = (a * dense_[l].weights).rowwise() + dense_[l].bias;
    if (spec_.use_batchnorm) {
      const RowVector mean = z.colwise().mean();
      const RowVector var =
          (z.rowwise() - mean).array().square().colwise().mean().matrix();
      const RowVector inv_std = (var.array() + spec_.bn_eps).rsqrt().matrix();
      Matrix xhat = (z.rowwise() - mean).array().rowwise() * inv_std.array();
      out.push_back(xhat);
      z = (xhat.array().rowwise() * bn_[l].gamma.array()).matrix().rowwise() + bn_[l].beta;
    } else {
      out.push_back(z);
    }
    a = z.cwiseMax(0.0);
  }
  return out;
}

Matrix Mlp::predict_proba(const Matrix& x) const {
  check_columns(x);
  Matrix a = x;
  for (std::size_t l = 0; l < spec_.hidden_sizes.size(); ++l) {
    Matrix z = (a * dense_[l].weights).rowwise() + dense_[l].bias;
    if (spec_.use_batchnorm) {
      const auto& bn = bn_[l];
      const RowVector inv_std = (bn.running_var.array() + spec_.bn_eps).rsqrt().matrix();
      z = ((z.rowwise() - bn.running_mean).array().rowwise() * (inv_std.array() * bn.gamma.array()))
              .matrix()
              .rowwise() +
          bn.beta;
    }
    a = z.cwiseMax(0.0);
  }
  const Matrix logits = (a * dense_.back().weights).rowwise() + dense_.back().bias;
  Matrix proba(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    double total = 0.0;
    for (Eigen::Index k = 0; k < logits.cols(); ++k) {
      proba(i, k) = std::exp(logits(i, k) - top);
      total += proba(i, k);
    }
    proba.row(i) /= total;
  }
  return proba;
}

namespace {

double accuracy_of(const Mlp& model, const Dataset& ds) {
  if (ds.size() == 0) return 0.0;
  const auto pred = model.predict(ds.features);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == ds.labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

}  // namespace

Mlp mlp_train(Mlp model, const Dataset& train, const Dataset* validation) {
  const auto& spec = model.spec_;
  if (static_cast<int>(train.num_features()) != spec.input_dim ||
      (validation && static_cast<int>(validation->num_features()) != spec.input_dim)) {
    throw Error(ErrorCode::ShapeMismatch, "feature dimension does not match the network input");
  }
  for (int label : train.labels) {
    if (label < 0 || label >= spec.num_classes) {
      throw Error(ErrorCode::ShapeMismatch, "label " + std::to_string(label) + " exceeds class count");
    }
  }
  const auto n = train.size();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "no training samples");

  std::vector<double> params = model.trainable_parameters();
  std::vector<double> grad;
  std::vector<double> m1(params.size(), 0.0), m2(params.size(), 0.0);
  std::size_t step = 0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const ForwardMode mode{.batch_stats = true, .noise = true, .dropout = true, .update_running = true};
  const auto batch = static_cast<std::size_t>(spec.batch_size);

  model.history_.clear();
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    Rng rng(spec.seed, "mlp-epoch", static_cast<std::uint64_t>(epoch));
    rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const auto stop = std::min(n, start + batch);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Matrix xb = select_rows(train.features, idx);
      std::vector<int> yb(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) yb[i] = train.labels[idx[i]];
      const double batch_loss = model.loss(xb, yb, mode, &grad, &rng);
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch + 1) + ", batch at row " +
                                                  std::to_string(start) + ": loss " +
                                                  std::to_string(batch_loss));
      }
      loss_sum += batch_loss * static_cast<double>(idx.size());
      ++step;
      if (const auto* adam = std::get_if<AdamConfig>(&spec.optimizer)) {
        const double c1 = 1.0 - std::pow(adam->beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(adam->beta2, static_cast<double>(step));
        for (std::size_t p = 0; p < params.size(); ++p) {
          m1[p] = adam->beta1 * m1[p] + (1.0 - adam->beta1) * grad[p];
          m2[p] = adam->beta2 * m2[p] + (1.0 - adam->beta2) * grad[p] * grad[p];
          params[p] -= adam->lr * (m1[p] / c1) / (std::sqrt(m2[p] / c2) + adam->eps);
        }
      } else {
        const auto& rms = std::get<RmspropConfig>(spec.optimizer);
        for (std::size_t p = 0; p < params.size(); ++p) {
          m2[p] = rms.rho * m2[p] + (1.0 - rms.rho) * grad[p] * grad[p];
          params[p] -= rms.lr * grad[p] / (std::sqrt(m2[p]) + rms.eps);
        }
      }
      model.set_trainable_parameters(params);
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.loss = loss_sum / static_cast<double>(n);
    rec.train_acc = accuracy_of(model, train);
    rec.val_acc = validation ? accuracy_of(model, *validation) : 0.0;
    model.history_.push_back(rec);
  }
  return model;
}

nlohmann::json Mlp::to_json() const {
  auto dense = nlohmann::json::array();
  for (const auto& d : dense_) {
    Matrix w = d.weights;
    dense.push_back({{"weights", enose::to_json(w)}, {"bias", enose::to_json(Vector(d.bias.transpose()))}});
  }
  auto bn = nlohmann::json::array();
  for (const auto& b : bn_) {
    bn.push_back({{"gamma", enose::to_json(Vector(b.gamma.transpose()))},
                  {"beta", enose::to_json(Vector(b.beta.transpose()))},
                  {"running_mean", enose::to_json(Vector(b.running_mean.transpose()))},
                  {"running_var", enose::to_json(Vector(b.running_var.transpose()))}});
  }
  auto hist = nlohmann::json::array();
  for (const auto& h : history_) {
    hist.push_back({{"epoch", h.epoch}, {"loss", h.loss}, {"train_acc", h.train_acc}, {"val_acc", h.val_acc}});
  }
  return {{"format_version", kModelFormatVersion},
          {"kind", kind()},
          {"num_classes", spec_.num_classes},
          {"num_features", spec_.input_dim},
          {"spec", spec_.to_json()},
          {"dense", std::move(dense)},
          {"batchnorm", std::move(bn)},
          {"history", std::move(hist)}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  Mlp m(MlpSpec::from_json(j.at("spec")));
  const auto& dense = j.at("dense");
  for (std::size_t l = 0; l < m.dense_.size(); ++l) {
    m.dense_[l].weights = matrix_from_json(dense.at(l).at("weights"));
    m.dense_[l].bias = vector_from_json(dense.at(l).at("bias")).transpose();
  }
  const auto& bn = j.at("batchnorm");
  for (std::size_t l = 0; l < m.bn_.size(); ++l) {
    m.bn_[l].gamma = vector_from_json(bn.at(l).at("gamma")).transpose();
    m.bn_[l].beta = vector_from_json(bn.at(l).at("beta")).transpose();
    m.bn_[l].running_mean = vector_from_json(bn.at(l).at("running_mean")).transpose();
    m.bn_[l].running_var = vector_from_json(bn.at(l).at("running_var")).transpose();
  }
  for (const auto& h : j.value("history", nlohmann::json::array())) {
    m.history_.push_back({h.at("epoch").get<int>(), h.at("loss").get<double>(),
                          h.at("train_acc").get<double>(), h.at("val_acc").get<double>()});
  }
  return m;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,loss,train_acc,val_acc\n";
  for (const auto& h : history) {
    out << h.epoch << ',' << h.loss << ',' << h.train_acc << ',' << h.val_acc << '\n';
  }
  return out.str();
}

}  // namespace enose
