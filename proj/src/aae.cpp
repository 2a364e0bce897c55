#include "aae/aae.hpp"

#include <cmath>
#include <fstream>

namespace aae {

void AaeConfig::validate() const {
  if (input_dim < 1) throw ValidationError("aae config: input_dim must be positive");
  if (code_dim < 1) throw ValidationError("aae config: code_dim must be positive");
  if (hidden_width < 1) throw ValidationError("aae config: hidden_width must be positive");
  if (hidden_depth < 1) throw ValidationError("aae config: hidden_depth must be positive");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ValidationError("aae config: dropout_rate must be in [0,1)");
  }
  if (batch_size < 1) throw ValidationError("aae config: batch_size must be positive");
  if (epochs < 1) throw ValidationError("aae config: epochs must be positive");
}

void write_epoch_log_csv(const std::vector<EpochLog>& logs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write epoch log: " + path);
  out << "epoch,split,recon_mse,discriminator_ce,generator_ce\n";
  for (const auto& log : logs) {
    out << log.epoch << "," << log.split << "," << format_double(log.recon_mse) << ","
        << format_double(log.discriminator_ce) << "," << format_double(log.generator_ce) << "\n";
  }
}

int AaeModel::label_index(const std::string& label) const {
  for (std::size_t i = 0; i < class_labels.size(); ++i) {
    if (class_labels[i] == label) return static_cast<int>(i);
  }
  throw ValidationError("aae model: unknown class label '" + label + "'");
}

void AaeModel::validate() const {
  config.validate();
  const int c = num_classes();
  if (prior.num_components() != c) {
    throw ValidationError("aae model: prior has " + std::to_string(prior.num_components()) +
                          " components for " + std::to_string(c) + " classes");
  }
  if (prior.code_dim() != config.code_dim) {
    throw ValidationError("aae model: prior code_dim != config code_dim");
  }
  if (encoder.input_dim() != config.input_dim || encoder.output_dim() != config.code_dim) {
    throw ValidationError("aae model: encoder dims inconsistent with config");
  }
  if (decoder.input_dim() != config.code_dim || decoder.output_dim() != config.input_dim) {
    throw ValidationError("aae model: decoder dims inconsistent with config");
  }
  if (discriminator.input_dim() != config.code_dim + c || discriminator.output_dim() != 1) {
    throw ValidationError("aae model: discriminator input must be code_dim + num_classes");
  }
}

AaeModel build(const AaeConfig& config, const std::vector<std::string>& class_labels,
               const MixturePrior& prior) {
  config.validate();
  if (class_labels.empty()) throw ValidationError("build: class labels must be non-empty");
  if (prior.num_components() != static_cast<int>(class_labels.size())) {
    throw ValidationError("build: prior component count != class count");
  }
  if (prior.code_dim() != config.code_dim) {
    throw ValidationError("build: prior code_dim " + std::to_string(prior.code_dim()) +
                          " != config code_dim " + std::to_string(config.code_dim));
  }
  const std::vector<int> hidden(static_cast<std::size_t>(config.hidden_depth),
                                config.hidden_width);
  // Per-network init streams keep parameter draws independent of each other.
  Rng enc_rng(derive_seed(config.seed, "init/encoder"));
  Rng dec_rng(derive_seed(config.seed, "init/decoder"));
  Rng disc_rng(derive_seed(config.seed, "init/discriminator"));
  const int num_classes = static_cast<int>(class_labels.size());
  AaeModel model{
      nn::Network::make_mlp(config.input_dim, hidden, config.code_dim, nn::Activation::Relu,
                            nn::Activation::Identity, config.dropout_rate, enc_rng),
      nn::Network::make_mlp(config.code_dim, hidden, config.input_dim, nn::Activation::Relu,
                            nn::Activation::Identity, config.dropout_rate, dec_rng),
      nn::Network::make_mlp(config.code_dim + num_classes, hidden, 1, nn::Activation::Relu,
                            nn::Activation::Sigmoid, config.dropout_rate, disc_rng),
      prior,
      config,
      class_labels};
  model.validate();
  return model;
}

Matrix one_hot(const std::vector<int>& label_indices, int num_classes) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(label_indices.size()), num_classes);
  for (std::size_t r = 0; r < label_indices.size(); ++r) {
    const int idx = label_indices[r];
    if (idx < 0 || idx >= num_classes) throw ValidationError("one_hot: index out of range");
    out(static_cast<Eigen::Index>(r), idx) = 1.0;
  }
  return out;
}

AaeTrainer::AaeTrainer(AaeModel& model, bool adversarial)
    : model_(model),
      adversarial_(adversarial),
      encoder_recon_opt_(model.encoder, model.config.reconstruction_opt),
      decoder_opt_(model.decoder, model.config.reconstruction_opt),
      discriminator_opt_(model.discriminator, model.config.discriminator_opt),
      encoder_gen_opt_(model.encoder, model.config.generator_opt),
      shuffle_rng_(derive_seed(model.config.seed, "train/shuffle")),
      recon_rng_(derive_seed(model.config.seed, "train/recon")),
      disc_rng_(derive_seed(model.config.seed, "train/disc")),
      gen_rng_(derive_seed(model.config.seed, "train/gen")) {
  model_.validate();
  if (model_.config.phase2_updates_encoder) {
    encoder_phase2_opt_.emplace(model_.encoder, model_.config.discriminator_opt);
  }
}

AaeTrainer::BatchLosses AaeTrainer::train_batch(const Matrix& inputs,
                                                const std::vector<int>& label_indices) {
  BatchLosses losses;
  const int batch = static_cast<int>(inputs.rows());
  const int code_dim = model_.code_dim();

  // Phase 1: reconstruction. Encoder and decoder move, discriminator does not.
  {
    nn::ForwardCache enc_cache, dec_cache;
    const Matrix codes =
        nn::forward(model_.encoder, inputs, nn::Mode::Train, &recon_rng_, &enc_cache);
    const Matrix recon =
        nn::forward(model_.decoder, codes, nn::Mode::Train, &recon_rng_, &dec_cache);
    const auto loss = nn::mse_loss(recon, inputs);
    losses.recon = loss.loss;
    if (!std::isfinite(loss.loss)) {
      throw TrainingDiverged("non-finite reconstruction loss at epoch " +
                             std::to_string(epoch_ + 1));
    }
    auto dec_grads = nn::backward(model_.decoder, dec_cache, loss.gradient);
    auto enc_grads = nn::backward(model_.encoder, enc_cache, dec_grads.input);
    decoder_opt_.apply(model_.decoder, dec_grads);
    encoder_recon_opt_.apply(model_.encoder, enc_grads);
  }

  if (!adversarial_) return losses;

  const Matrix labels_one_hot = one_hot(label_indices, model_.num_classes());

  // Phase 2: discriminator. Prior draws are the "synthetic" target 1, encoder
  // codes the "real" target 0; both carry the row's class one-hot.
  {
    nn::ForwardCache enc_cache;
    Matrix codes;
    if (model_.config.phase2_updates_encoder) {
      codes = nn::forward(model_.encoder, inputs, nn::Mode::Train, &disc_rng_, &enc_cache);
    } else {
      codes = nn::forward(model_.encoder, inputs, nn::Mode::Eval, nullptr);
    }
    Matrix prior_draws(batch, code_dim);
    for (int r = 0; r < batch; ++r) {
      const auto& comp = model_.prior.components()[label_indices[static_cast<std::size_t>(r)]];
      for (int c = 0; c < code_dim; ++c) {
        prior_draws(r, c) = comp.mean(c) + comp.stddev(c) * disc_rng_.normal();
      }
    }
    Matrix disc_inputs(2 * batch, code_dim + model_.num_classes());
    disc_inputs.topLeftCorner(batch, code_dim) = codes;
    disc_inputs.topRightCorner(batch, model_.num_classes()) = labels_one_hot;
    disc_inputs.bottomLeftCorner(batch, code_dim) = prior_draws;
    disc_inputs.bottomRightCorner(batch, model_.num_classes()) = labels_one_hot;
    Matrix targets(2 * batch, 1);
    targets.topRows(batch).setZero();
    targets.bottomRows(batch).setOnes();

    nn::ForwardCache disc_cache;
    const Matrix p =
        nn::forward(model_.discriminator, disc_inputs, nn::Mode::Train, &disc_rng_, &disc_cache);
    const auto loss = nn::binary_cross_entropy(p, targets);
    losses.disc = loss.loss;
    if (!std::isfinite(loss.loss)) {
      throw TrainingDiverged("non-finite discriminator loss at epoch " +
                             std::to_string(epoch_ + 1));
    }
    auto disc_grads = nn::backward(model_.discriminator, disc_cache, loss.gradient);
    if (model_.config.phase2_updates_encoder) {
      const Matrix code_grad = disc_grads.input.topRows(batch).leftCols(code_dim);
      auto enc_grads = nn::backward(model_.encoder, enc_cache, code_grad);
      encoder_phase2_opt_->apply(model_.encoder, enc_grads);
    }
    discriminator_opt_.apply(model_.discriminator, disc_grads);
  }

  // Phase 3: generator. Discriminator frozen; the encoder is pushed to get
  // its codes labeled as synthetic (target 1).
  {
    nn::ForwardCache enc_cache, disc_cache;
    const Matrix codes =
        nn::forward(model_.encoder, inputs, nn::Mode::Train, &gen_rng_, &enc_cache);
    Matrix disc_inputs(batch, code_dim + model_.num_classes());
    disc_inputs.leftCols(code_dim) = codes;
    disc_inputs.rightCols(model_.num_classes()) = labels_one_hot;
    const Matrix p =
        nn::forward(model_.discriminator, disc_inputs, nn::Mode::Train, &gen_rng_, &disc_cache);
    const Matrix targets = Matrix::Ones(batch, 1);
    const auto loss = nn::binary_cross_entropy(p, targets);
    losses.gen = loss.loss;
    if (!std::isfinite(loss.loss)) {
      throw TrainingDiverged("non-finite generator loss at epoch " + std::to_string(epoch_ + 1));
    }
    auto disc_grads = nn::backward(model_.discriminator, disc_cache, loss.gradient);
    auto enc_grads =
        nn::backward(model_.encoder, enc_cache, disc_grads.input.leftCols(code_dim));
    encoder_gen_opt_.apply(model_.encoder, enc_grads);
  }

  return losses;
}

EpochLog AaeTrainer::train_epoch(const Dataset& train) {
  train.validate();
  if (train.num_features() != model_.input_dim()) {
    throw ShapeError("train_epoch: dataset has " + std::to_string(train.num_features()) +
                     " features, model expects " + std::to_string(model_.input_dim()));
  }
  if (train.num_rows() < 1) throw ValidationError("train_epoch: empty dataset");
  std::vector<int> label_indices(static_cast<std::size_t>(train.num_rows()));
  for (int r = 0; r < train.num_rows(); ++r) {
    label_indices[static_cast<std::size_t>(r)] =
        adversarial_ ? model_.label_index(train.labels[static_cast<std::size_t>(r)]) : 0;
  }

  std::vector<int> order(static_cast<std::size_t>(train.num_rows()));
  for (int i = 0; i < train.num_rows(); ++i) order[static_cast<std::size_t>(i)] = i;
  shuffle_rng_.shuffle(order);

  const int batch_size = model_.config.batch_size;
  double recon_sum = 0.0, disc_sum = 0.0, gen_sum = 0.0;
  int batches = 0;
  for (int start = 0; start < train.num_rows(); start += batch_size) {
    const int count = std::min(batch_size, train.num_rows() - start);
    Matrix inputs(count, train.num_features());
    std::vector<int> batch_labels(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const int row = order[static_cast<std::size_t>(start + i)];
      inputs.row(i) = train.features.row(row);
      batch_labels[static_cast<std::size_t>(i)] = label_indices[static_cast<std::size_t>(row)];
    }
    const auto losses = train_batch(inputs, batch_labels);
    recon_sum += losses.recon;
    disc_sum += losses.disc;
    gen_sum += losses.gen;
    ++batches;
  }

  ++epoch_;
  EpochLog log;
  log.epoch = epoch_;
  log.recon_mse = recon_sum / batches;
  log.discriminator_ce = disc_sum / batches;
  log.generator_ce = gen_sum / batches;
  log.split = "train";
  if (epoch_ == 1) {
    first_epoch_recon_ = log.recon_mse;
  } else if (log.recon_mse > 10.0 * first_epoch_recon_) {
    throw TrainingDiverged("reconstruction loss " + std::to_string(log.recon_mse) +
                           " exceeded 10x its epoch-1 value " +
                           std::to_string(first_epoch_recon_) + " at epoch " +
                           std::to_string(epoch_));
  }
  return log;
}

Matrix encode(const AaeModel& model, const Matrix& features) {
  if (features.cols() != model.input_dim()) {
    throw ShapeError("encode: feature dimension " + std::to_string(features.cols()) +
                     " != model input_dim " + std::to_string(model.input_dim()));
  }
  return nn::forward(model.encoder, features, nn::Mode::Eval, nullptr);
}

Matrix decode(const AaeModel& model, const Matrix& codes) {
  if (codes.cols() != model.code_dim()) {
    throw ShapeError("decode: code dimension " + std::to_string(codes.cols()) +
                     " != model code_dim " + std::to_string(model.code_dim()));
  }
  return nn::forward(model.decoder, codes, nn::Mode::Eval, nullptr);
}

Dataset generate_synthetic(const AaeModel& model, int per_class, Rng& rng) {
  if (per_class < 1) throw ValidationError("generate_synthetic: per_class must be >= 1");
  const int num_classes = model.num_classes();
  Dataset out;
  out.features.resize(per_class * num_classes, model.input_dim());
  for (int d = 0; d < model.input_dim(); ++d) out.feature_names.push_back("f" + std::to_string(d));
  int row = 0;
  for (int c = 0; c < num_classes; ++c) {
    const Matrix codes = model.prior.sample_component(c, per_class, rng);
    const Matrix features = decode(model, codes);
    for (int i = 0; i < per_class; ++i, ++row) {
      out.features.row(row) = features.row(i);
      out.labels.push_back(model.class_labels[static_cast<std::size_t>(c)]);
      out.session_ids.push_back("synthetic");
      out.speaker_ids.push_back("synthetic");
    }
  }
  out.validate();
  return out;
}

EpochLog evaluate_losses(const AaeModel& model, const Dataset& data, Rng& rng) {
  data.validate();
  if (data.num_features() != model.input_dim()) {
    throw ShapeError("evaluate_losses: feature dimension mismatch");
  }
  const int n = data.num_rows();
  if (n < 1) throw ValidationError("evaluate_losses: empty dataset");
  std::vector<int> label_indices(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    label_indices[static_cast<std::size_t>(r)] = model.label_index(data.labels[static_cast<std::size_t>(r)]);
  }

  EpochLog log;
  const Matrix codes = encode(model, data.features);
  const Matrix recon = decode(model, codes);
  log.recon_mse = nn::mse_loss(recon, data.features).loss;

  const int code_dim = model.code_dim();
  Matrix prior_draws(n, code_dim);
  for (int r = 0; r < n; ++r) {
    const auto& comp = model.prior.components()[label_indices[static_cast<std::size_t>(r)]];
    for (int c = 0; c < code_dim; ++c) {
      prior_draws(r, c) = comp.mean(c) + comp.stddev(c) * rng.normal();
    }
  }
  const Matrix labels_one_hot = one_hot(label_indices, model.num_classes());
  Matrix disc_inputs(2 * n, code_dim + model.num_classes());
  disc_inputs.topLeftCorner(n, code_dim) = codes;
  disc_inputs.topRightCorner(n, model.num_classes()) = labels_one_hot;
  disc_inputs.bottomLeftCorner(n, code_dim) = prior_draws;
  disc_inputs.bottomRightCorner(n, model.num_classes()) = labels_one_hot;
  Matrix targets(2 * n, 1);
  targets.topRows(n).setZero();
  targets.bottomRows(n).setOnes();
  const Matrix p = nn::forward(model.discriminator, disc_inputs, nn::Mode::Eval, nullptr);
  log.discriminator_ce = nn::binary_cross_entropy(p, targets).loss;
  log.generator_ce =
      nn::binary_cross_entropy(p.topRows(n), Matrix::Ones(n, 1)).loss;
  log.split = "eval";
  return log;
}

}  // namespace aae
