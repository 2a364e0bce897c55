#include "aae/nn.hpp"

#include <cmath>

namespace aae::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw ValidationError("unknown activation: " + name);
}

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ValidationError("network needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    if (layer.dense.bias.size() != layer.dense.fan_out()) {
      throw ShapeError("layer " + std::to_string(i) + ": bias length " +
                       std::to_string(layer.dense.bias.size()) + " != fan_out " +
                       std::to_string(layer.dense.fan_out()));
    }
    if (layer.dropout_rate < 0.0 || layer.dropout_rate >= 1.0) {
      throw ValidationError("layer " + std::to_string(i) + ": dropout rate must be in [0,1)");
    }
    if (i > 0 && layers_[i - 1].dense.fan_out() != layer.dense.fan_in()) {
      throw ShapeError("layer " + std::to_string(i) + ": fan_in " +
                       std::to_string(layer.dense.fan_in()) + " does not chain with previous fan_out " +
                       std::to_string(layers_[i - 1].dense.fan_out()));
    }
  }
}

int Network::input_dim() const { return layers_.front().dense.fan_in(); }
int Network::output_dim() const { return layers_.back().dense.fan_out(); }

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) {
    n += static_cast<std::size_t>(layer.dense.weights.size()) +
         static_cast<std::size_t>(layer.dense.bias.size());
  }
  return n;
}

namespace {

DenseLayer glorot_dense(int fan_in, int fan_out, Rng& rng) {
  DenseLayer d;
  d.weights.resize(fan_in, fan_out);
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (int r = 0; r < fan_in; ++r) {
    for (int c = 0; c < fan_out; ++c) {
      d.weights(r, c) = rng.uniform(-limit, limit);
    }
  }
  d.bias = RowVector::Zero(fan_out);
  return d;
}

Matrix apply_activation(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::Identity: return z;
    case Activation::Relu: return z.cwiseMax(0.0);
    case Activation::Tanh: return z.array().tanh().matrix();
    case Activation::Sigmoid: return (1.0 / (1.0 + (-z.array()).exp())).matrix();
  }
  return z;
}

Matrix activation_derivative(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::Identity: return Matrix::Ones(z.rows(), z.cols());
    case Activation::Relu: return (z.array() > 0.0).cast<double>().matrix();
    case Activation::Tanh: {
      const Matrix t = z.array().tanh().matrix();
      return (1.0 - t.array().square()).matrix();
    }
    case Activation::Sigmoid: {
      const Matrix s = (1.0 / (1.0 + (-z.array()).exp())).matrix();
      return (s.array() * (1.0 - s.array())).matrix();
    }
  }
  return Matrix::Ones(z.rows(), z.cols());
}

}  // namespace

Network Network::make_mlp(int input_dim, const std::vector<int>& hidden_dims, int output_dim,
                          Activation hidden_activation, Activation output_activation,
                          double dropout_rate, Rng& rng) {
  if (input_dim < 1 || output_dim < 1) throw ValidationError("make_mlp: dims must be positive");
  std::vector<Layer> layers;
  int prev = input_dim;
  for (int width : hidden_dims) {
    if (width < 1) throw ValidationError("make_mlp: hidden width must be positive");
    Layer layer;
    layer.dense = glorot_dense(prev, width, rng);
    layer.activation = hidden_activation;
    layer.dropout_rate = dropout_rate;
    layers.push_back(std::move(layer));
    prev = width;
  }
  Layer out;
  out.dense = glorot_dense(prev, output_dim, rng);
  out.activation = output_activation;
  out.dropout_rate = 0.0;
  layers.push_back(std::move(out));
  return Network(std::move(layers));
}

Matrix forward(const Network& net, const Matrix& inputs, Mode mode, Rng* rng,
               ForwardCache* cache) {
  if (net.num_layers() == 0) throw UsageError("forward: empty network");
  if (inputs.cols() != net.input_dim()) {
    throw ShapeError("forward: input has " + std::to_string(inputs.cols()) +
                     " columns but layer 0 expects " + std::to_string(net.input_dim()));
  }
  if (cache) {
    cache->network = &net;
    cache->mode = mode;
    cache->input = inputs;
    cache->pre_activations.assign(net.num_layers(), Matrix());
    cache->outputs.assign(net.num_layers(), Matrix());
    cache->dropout_masks.assign(net.num_layers(), Matrix());
  }
  Matrix current = inputs;
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    const Layer& layer = net.layers()[i];
    Matrix z = current * layer.dense.weights;
    z.rowwise() += layer.dense.bias;
    Matrix a = apply_activation(layer.activation, z);
    const bool dropping = mode == Mode::Train && layer.dropout_rate > 0.0;
    if (dropping) {
      if (!rng) throw UsageError("forward: train-mode dropout needs an rng");
      const double keep = 1.0 - layer.dropout_rate;
      Matrix mask(a.rows(), a.cols());
      for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
          mask(r, c) = rng->uniform() < keep ? 1.0 / keep : 0.0;
        }
      }
      a = a.cwiseProduct(mask);
      if (cache) cache->dropout_masks[i] = std::move(mask);
    }
    if (cache) {
      cache->pre_activations[i] = std::move(z);
      cache->outputs[i] = a;
    }
    current = std::move(a);
  }
  return current;
}

Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& output_gradient) {
  if (cache.network != &net || cache.pre_activations.size() != net.num_layers()) {
    throw UsageError("backward: cache does not match this network");
  }
  const auto n = net.num_layers();
  if (output_gradient.rows() != cache.input.rows() ||
      output_gradient.cols() != net.output_dim()) {
    throw ShapeError("backward: output gradient shape mismatch");
  }
  Gradients grads;
  grads.weights.assign(n, Matrix());
  grads.biases.assign(n, RowVector());

  Matrix delta = output_gradient;  // gradient w.r.t. the layer output
  for (std::size_t idx = n; idx-- > 0;) {
    const Layer& layer = net.layers()[idx];
    if (cache.dropout_masks[idx].size() > 0) {
      delta = delta.cwiseProduct(cache.dropout_masks[idx]);
    }
    Matrix dz = delta.cwiseProduct(activation_derivative(layer.activation, cache.pre_activations[idx]));
    const Matrix& layer_input = idx == 0 ? cache.input : cache.outputs[idx - 1];
    grads.weights[idx] = layer_input.transpose() * dz;
    grads.biases[idx] = dz.colwise().sum();
    delta = dz * layer.dense.weights.transpose();
  }
  grads.input = std::move(delta);
  return grads;
}

LossValue mse_loss(const Matrix& prediction, const Matrix& target) {
  if (prediction.rows() != target.rows() || prediction.cols() != target.cols()) {
    throw ShapeError("mse_loss: prediction and target shapes differ");
  }
  const double n = static_cast<double>(prediction.size());
  const Matrix diff = prediction - target;
  LossValue out;
  out.loss = diff.array().square().sum() / n;
  out.gradient = diff * (2.0 / n);
  return out;
}

LossValue binary_cross_entropy(const Matrix& prediction, const Matrix& labels, double eps) {
  if (prediction.rows() != labels.rows() || prediction.cols() != labels.cols()) {
    throw ShapeError("binary_cross_entropy: prediction and label shapes differ");
  }
  for (Eigen::Index r = 0; r < labels.rows(); ++r) {
    for (Eigen::Index c = 0; c < labels.cols(); ++c) {
      const double y = labels(r, c);
      if (y != 0.0 && y != 1.0) {
        throw ValidationError("binary_cross_entropy: label must be 0 or 1, got " +
                              std::to_string(y));
      }
    }
  }
  const double n = static_cast<double>(prediction.size());
  const Eigen::ArrayXXd p = prediction.array().min(1.0 - eps).max(eps);
  const Eigen::ArrayXXd y = labels.array();
  LossValue out;
  out.loss = -((y * p.log()) + (1.0 - y) * (1.0 - p).log()).sum() / n;
  out.gradient = ((p - y) / (p * (1.0 - p)) / n).matrix();
  return out;
}

Optimizer::Optimizer(const Network& net, OptimizerSettings settings) : settings_(settings) {
  if (settings_.learning_rate < 0.0) throw ValidationError("optimizer: learning rate must be >= 0");
  for (const auto& layer : net.layers()) {
    m_weights_.push_back(Matrix::Zero(layer.dense.weights.rows(), layer.dense.weights.cols()));
    v_weights_.push_back(Matrix::Zero(layer.dense.weights.rows(), layer.dense.weights.cols()));
    m_biases_.push_back(RowVector::Zero(layer.dense.bias.size()));
    v_biases_.push_back(RowVector::Zero(layer.dense.bias.size()));
  }
}

void Optimizer::apply(Network& net, const Gradients& grads) {
  if (grads.weights.size() != net.num_layers()) {
    throw ShapeError("optimizer: gradient set does not match network layer count");
  }
  ++step_;
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    auto& w = net.layers()[i].dense.weights;
    auto& b = net.layers()[i].dense.bias;
    const Matrix& gw = grads.weights[i];
    const RowVector& gb = grads.biases[i];
    if (gw.rows() != w.rows() || gw.cols() != w.cols() || gb.size() != b.size()) {
      throw ShapeError("optimizer: gradient shape mismatch at layer " + std::to_string(i));
    }
    if (settings_.kind == OptimizerSettings::Kind::SgdMomentum) {
      if (settings_.momentum != 0.0) {
        m_weights_[i] = settings_.momentum * m_weights_[i] + gw;
        m_biases_[i] = settings_.momentum * m_biases_[i] + gb;
        w -= settings_.learning_rate * m_weights_[i];
        b -= settings_.learning_rate * m_biases_[i];
      } else {
        w -= settings_.learning_rate * gw;
        b -= settings_.learning_rate * gb;
      }
    } else {
      const double b1 = settings_.beta1;
      const double b2 = settings_.beta2;
      const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
      const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
      m_weights_[i] = b1 * m_weights_[i] + (1.0 - b1) * gw;
      v_weights_[i] = b2 * v_weights_[i] + (1.0 - b2) * gw.cwiseProduct(gw);
      m_biases_[i] = b1 * m_biases_[i] + (1.0 - b1) * gb;
      v_biases_[i] = b2 * v_biases_[i] + (1.0 - b2) * gb.cwiseProduct(gb);
      w.array() -= settings_.learning_rate * (m_weights_[i].array() / correction1) /
                   ((v_weights_[i].array() / correction2).sqrt() + settings_.epsilon);
      b.array() -= settings_.learning_rate * (m_biases_[i].array() / correction1) /
                   ((v_biases_[i].array() / correction2).sqrt() + settings_.epsilon);
    }
  }
}

namespace {

LossValue evaluate_loss(LossKind kind, const Matrix& prediction, const Matrix& target) {
  return kind == LossKind::Mse ? mse_loss(prediction, target)
                               : binary_cross_entropy(prediction, target);
}

double* parameter_at(Network& net, std::size_t flat_index) {
  for (auto& layer : net.layers()) {
    const auto wsize = static_cast<std::size_t>(layer.dense.weights.size());
    if (flat_index < wsize) return layer.dense.weights.data() + flat_index;
    flat_index -= wsize;
    const auto bsize = static_cast<std::size_t>(layer.dense.bias.size());
    if (flat_index < bsize) return layer.dense.bias.data() + flat_index;
    flat_index -= bsize;
  }
  return nullptr;
}

double analytic_at(const Gradients& grads, std::size_t flat_index) {
  for (std::size_t i = 0; i < grads.weights.size(); ++i) {
    const auto wsize = static_cast<std::size_t>(grads.weights[i].size());
    if (flat_index < wsize) return grads.weights[i].data()[flat_index];
    flat_index -= wsize;
    const auto bsize = static_cast<std::size_t>(grads.biases[i].size());
    if (flat_index < bsize) return grads.biases[i].data()[flat_index];
    flat_index -= bsize;
  }
  return 0.0;
}

}  // namespace

double gradient_check(Network& net, LossKind loss, const Batch& sample, double step,
                      uint64_t mask_seed, double corrupt_offset) {
  // Reseeding per forward call replays identical dropout masks, so the
  // perturbed losses stay on the same (mask-conditioned) loss surface.
  auto run_forward = [&](ForwardCache* cache) {
    Rng rng(mask_seed);
    return forward(net, sample.inputs, Mode::Train, &rng, cache);
  };

  ForwardCache cache;
  const Matrix prediction = run_forward(&cache);
  const LossValue base = evaluate_loss(loss, prediction, sample.targets);
  const Gradients analytic = backward(net, cache, base.gradient);

  double max_rel_error = 0.0;
  const std::size_t count = net.parameter_count();
  for (std::size_t idx = 0; idx < count; ++idx) {
    double* param = parameter_at(net, idx);
    const double original = *param;
    *param = original + step;
    const double loss_plus = evaluate_loss(loss, run_forward(nullptr), sample.targets).loss;
    *param = original - step;
    const double loss_minus = evaluate_loss(loss, run_forward(nullptr), sample.targets).loss;
    *param = original;
    const double numeric = (loss_plus - loss_minus) / (2.0 * step);
    const double a = analytic_at(analytic, idx) + corrupt_offset;
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    max_rel_error = std::max(max_rel_error, std::abs(a - numeric) / denom);
  }
  return max_rel_error;
}

std::vector<GradientCheckResult> gradient_check_battery(uint64_t seed, double corrupt_offset) {
  const Activation hidden_kinds[] = {Activation::Relu, Activation::Tanh, Activation::Sigmoid,
                                     Activation::Identity};
  std::vector<GradientCheckResult> results;
  for (int i = 0; i < 20; ++i) {
    Rng rng(derive_seed(seed, "gradcheck/" + std::to_string(i)));
    const Activation hidden = hidden_kinds[i % 4];
    const LossKind loss = i % 2 == 0 ? LossKind::Mse : LossKind::BinaryCrossEntropy;
    const Activation output =
        loss == LossKind::Mse ? Activation::Identity : Activation::Sigmoid;
    const int input_dim = 3 + i % 3;
    const int output_dim = loss == LossKind::Mse ? 2 : 1;
    std::vector<int> hidden_dims = {5};
    if (i % 3 == 0) hidden_dims.push_back(4);
    const double dropout = i % 5 == 0 ? 0.3 : 0.0;
    Network net = Network::make_mlp(input_dim, hidden_dims, output_dim, hidden, output,
                                    dropout, rng);

    const int batch = 4;
    Batch sample;
    const uint64_t mask_seed = derive_seed(seed, "mask/" + std::to_string(i));
    // Resample until every relu pre-activation sits clear of its kink.
    for (int attempt = 0; attempt < 100; ++attempt) {
      sample.inputs.resize(batch, input_dim);
      for (int r = 0; r < batch; ++r) {
        for (int c = 0; c < input_dim; ++c) sample.inputs(r, c) = rng.normal();
      }
      if (hidden != Activation::Relu) break;
      ForwardCache cache;
      Rng mask_rng(mask_seed);
      forward(net, sample.inputs, Mode::Train, &mask_rng, &cache);
      bool near_kink = false;
      for (std::size_t layer = 0; layer + 1 < net.num_layers(); ++layer) {
        if (cache.pre_activations[layer].cwiseAbs().minCoeff() < 1e-3) {
          near_kink = true;
          break;
        }
      }
      if (!near_kink) break;
    }
    sample.targets.resize(batch, output_dim);
    for (int r = 0; r < batch; ++r) {
      for (int c = 0; c < output_dim; ++c) {
        sample.targets(r, c) = loss == LossKind::Mse
                                   ? rng.normal()
                                   : static_cast<double>(rng.uniform_index(2));
      }
    }

    GradientCheckResult result;
    result.description = "net" + std::to_string(i) + " " + to_string(hidden) + "/" +
                         to_string(output) +
                         (loss == LossKind::Mse ? " mse" : " bce") +
                         (dropout > 0.0 ? " dropout" : "");
    result.max_rel_error = gradient_check(net, loss, sample, 1e-5, mask_seed, corrupt_offset);
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace aae::nn
