#pragma once

#include "aae/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace aae::nn {

enum class Activation { Identity, Relu, Tanh, Sigmoid };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

// Fully connected layer; weights are fan_in x fan_out so a batch maps as
// outputs = inputs * weights + bias.
struct DenseLayer {
  Matrix weights;
  RowVector bias;

  int fan_in() const { return static_cast<int>(weights.rows()); }
  int fan_out() const { return static_cast<int>(weights.cols()); }
};

struct Layer {
  DenseLayer dense;
  Activation activation = Activation::Identity;
  // Inverted dropout applied after the activation; 0 disables it.
  double dropout_rate = 0.0;
};

class Network {
 public:
  Network() = default;
  explicit Network(std::vector<Layer> layers);

  int input_dim() const;
  int output_dim() const;
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t parameter_count() const;

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  // Glorot-uniform initialized MLP: in -> hidden... -> out. Dropout is placed
  // after every hidden activation, never on the output layer.
  static Network make_mlp(int input_dim, const std::vector<int>& hidden_dims, int output_dim,
                          Activation hidden_activation, Activation output_activation,
                          double dropout_rate, Rng& rng);

 private:
  std::vector<Layer> layers_;
};

enum class Mode { Train, Eval };

// Everything backward() needs from the matching forward() call.
struct ForwardCache {
  const Network* network = nullptr;
  Mode mode = Mode::Eval;
  Matrix input;
  std::vector<Matrix> pre_activations;   // per layer, before the activation
  std::vector<Matrix> outputs;           // per layer, after activation and dropout
  std::vector<Matrix> dropout_masks;     // empty matrix when the layer has no dropout
};

// rng may be null in eval mode or when no layer has dropout.
Matrix forward(const Network& net, const Matrix& inputs, Mode mode, Rng* rng,
               ForwardCache* cache = nullptr);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<RowVector> biases;
  Matrix input;  // gradient w.r.t. the batch input, needed to chain networks
};

Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& output_gradient);

struct LossValue {
  double loss = 0.0;
  Matrix gradient;  // d loss / d prediction
};

LossValue mse_loss(const Matrix& prediction, const Matrix& target);

// Predictions are probabilities, labels are 0/1. Predictions are clamped to
// [eps, 1-eps] before the logs.
LossValue binary_cross_entropy(const Matrix& prediction, const Matrix& labels,
                               double eps = 1e-7);

struct OptimizerSettings {
  enum class Kind { SgdMomentum, Adam };
  Kind kind = Kind::Adam;
  double learning_rate = 1e-4;
  double momentum = 0.0;  // sgd only
  double beta1 = 0.9;     // adam
  double beta2 = 0.999;   // adam
  double epsilon = 1e-8;  // adam

  static OptimizerSettings adam(double lr) {
    OptimizerSettings s;
    s.kind = Kind::Adam;
    s.learning_rate = lr;
    return s;
  }
  static OptimizerSettings sgd(double lr, double momentum = 0.0) {
    OptimizerSettings s;
    s.kind = Kind::SgdMomentum;
    s.learning_rate = lr;
    s.momentum = momentum;
    return s;
  }
};

// Owns the per-parameter accumulators for one network.
class Optimizer {
 public:
  Optimizer(const Network& net, OptimizerSettings settings);

  void apply(Network& net, const Gradients& grads);
  const OptimizerSettings& settings() const { return settings_; }

 private:
  OptimizerSettings settings_;
  long step_ = 0;
  std::vector<Matrix> m_weights_, v_weights_;
  std::vector<RowVector> m_biases_, v_biases_;
};

struct Batch {
  Matrix inputs;
  Matrix targets;
};

enum class LossKind { Mse, BinaryCrossEntropy };

// Central-difference check of the analytic gradients. Returns the max over
// all parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
// Dropout masks are replayed by reseeding the forward rng per evaluation.
// corrupt_offset shifts every analytic gradient before comparison; it exists
// as a negative control so harnesses can prove the check reports failures.
double gradient_check(Network& net, LossKind loss, const Batch& sample,
                      double step = 1e-5, uint64_t mask_seed = 0,
                      double corrupt_offset = 0.0);

struct GradientCheckResult {
  std::string description;
  double max_rel_error = 0.0;
};

// 20 random small networks covering every activation kind and both losses.
// Relu inputs are resampled away from the kinks.
std::vector<GradientCheckResult> gradient_check_battery(uint64_t seed,
                                                        double corrupt_offset = 0.0);

}  // namespace aae::nn
