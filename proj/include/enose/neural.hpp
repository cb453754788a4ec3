#pragma once

#include "enose/classifier.hpp"
#include "enose/dataset.hpp"
#include "enose/rng.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace enose {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct RmspropConfig {
  double lr = 1e-3;
  double rho = 0.9;
  double eps = 1e-7;
};

using OptimizerConfig = std::variant<AdamConfig, RmspropConfig>;

/// Feed-forward classifier layout:
/// [GaussianNoise] -> {Dense -> BatchNorm -> ReLU -> Dropout} x H -> Dense -> softmax
struct MlpSpec {
  int input_dim = 0;
  int num_classes = 0;
  std::vector<int> hidden_sizes;
  double noise_sigma = 0.0;
  double dropout_p = 0.0;
  bool use_batchnorm = false;
  double l2_lambda = 0.0;
  OptimizerConfig optimizer = AdamConfig{};
  int epochs = 50;
  int batch_size = 128;
  std::uint64_t seed = 0;
  double bn_momentum = 0.99;
  double bn_eps = 1e-8;

  void validate() const;
  nlohmann::json to_json() const;
  static MlpSpec from_json(const nlohmann::json& j);
};

enum class MlpVariant { Baseline, Deeper, Wider, L2, Rmsprop };

std::string_view to_string(MlpVariant v);
MlpVariant parse_variant(std::string_view name);
const std::vector<MlpVariant>& all_variants();

/// Concrete spec for a named architecture variant.
MlpSpec variant_spec(MlpVariant variant, int input_dim, int num_classes);
MlpSpec variant_spec(std::string_view name, int input_dim, int num_classes);

/// Closed-form size: sum over dense layers of (in * out + out), plus four
/// values (scale, shift, running mean, running variance) per batchnorm unit.
std::size_t mlp_parameter_count(const MlpSpec& spec);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

/// Switches for one forward/backward evaluation.
struct ForwardMode {
  /// Normalize with the batch's own statistics (training) rather than the
  /// running estimates.
  bool batch_stats = false;
  bool noise = false;
  bool dropout = false;
  /// Fold the batch statistics into the running estimates.
  bool update_running = false;
};

class Mlp final : public Classifier {
 public:
  struct Dense {
    Eigen::MatrixXd weights;  // in x out
    RowVector bias;
  };
  struct BatchNorm {
    RowVector gamma;
    RowVector beta;
    RowVector running_mean;
    RowVector running_var;
  };

  Mlp() = default;
  explicit Mlp(MlpSpec spec);

  std::string kind() const override { return "mlp"; }
  int num_classes() const override { return spec_.num_classes; }
  int num_features() const override { return spec_.input_dim; }
  /// Inference mode: running batchnorm statistics, no noise or dropout.
  Matrix predict_proba(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  static Mlp from_json(const nlohmann::json& j);

  const MlpSpec& spec() const { return spec_; }
  const std::vector<EpochRecord>& history() const { return history_; }
  std::size_t parameter_count() const;

  /// Trainable values (dense weights and biases, batchnorm scale and shift)
  /// flattened in a fixed order.
  std::vector<double> trainable_parameters() const;
  void set_trainable_parameters(std::span<const double> values);

  /// Mean cross-entropy plus lambda * sum ||W||^2 over dense weights. When
  /// `gradient` is non-null it receives d(loss)/d(trainable parameters).
  /// `rng` is required when noise or dropout is enabled; running statistics
  /// are updated only when mode.update_running is set.
  double loss(const Matrix& x, std::span<const int> y, const ForwardMode& mode,
              std::vector<double>* gradient = nullptr, Rng* rng = nullptr);

  /// Pre-activation batchnorm outputs (before scale/shift) of every hidden
  /// layer for one forward pass in training mode without noise/dropout.
  std::vector<Matrix> normalized_preactivations(const Matrix& x) const;

  /// Zeroes every trainable parameter.
  void zero_parameters();

  std::vector<Dense>& dense_layers() { return dense_; }
  std::vector<BatchNorm>& batchnorm_layers() { return bn_; }

 private:
  friend Mlp mlp_train(Mlp model, const Dataset& train, const Dataset* validation);

  MlpSpec spec_;
  std::vector<Dense> dense_;
  std::vector<BatchNorm> bn_;
  std::vector<EpochRecord> history_;
};

/// Untrained network with seeded Glorot-uniform weights, zero biases,
/// unit batchnorm scale and zero shift.
Mlp mlp_build(const MlpSpec& spec);

/// Mini-batch training for spec.epochs epochs. Deterministic given the
/// spec seed. Throws NonFiniteLoss if the loss diverges.
Mlp mlp_train(Mlp model, const Dataset& train, const Dataset* validation = nullptr);

std::string history_csv(const std::vector<EpochRecord>& history);

}  // namespace enose
