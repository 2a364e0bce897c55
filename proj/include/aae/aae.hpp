#pragma once

#include "aae/common.hpp"
#include "aae/dataset.hpp"
#include "aae/nn.hpp"
#include "aae/prior.hpp"

#include <optional>
#include <string>
#include <vector>

namespace aae {

struct AaeConfig {
  int input_dim = 0;
  int code_dim = 2;
  int hidden_width = 1000;
  int hidden_depth = 2;
  double dropout_rate = 0.5;
  int batch_size = 64;
  int epochs = 100;
  nn::OptimizerSettings reconstruction_opt = nn::OptimizerSettings::adam(1e-4);
  nn::OptimizerSettings discriminator_opt = nn::OptimizerSettings::adam(1e-4);
  nn::OptimizerSettings generator_opt = nn::OptimizerSettings::adam(1e-4);
  // The nonstandard variant where the encoder is also updated during the
  // discriminator phase.
  bool phase2_updates_encoder = false;
  // Stop early once the relative reconstruction-loss change over a 10-epoch
  // window drops below 1e-4.
  bool plateau_stopping = false;
  uint64_t seed = 0;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double recon_mse = 0.0;
  double discriminator_ce = 0.0;
  double generator_ce = 0.0;
  std::string split = "train";
};

void write_epoch_log_csv(const std::vector<EpochLog>& logs, const std::string& path);

struct AaeModel {
  nn::Network encoder;        // D -> hidden^depth -> K
  nn::Network decoder;        // K -> hidden^depth -> D
  nn::Network discriminator;  // (K + C) -> hidden^depth -> 1
  MixturePrior prior;
  AaeConfig config;
  std::vector<std::string> class_labels;  // fixes the one-hot order

  int input_dim() const { return config.input_dim; }
  int code_dim() const { return config.code_dim; }
  int num_classes() const { return static_cast<int>(class_labels.size()); }
  int label_index(const std::string& label) const;
  void validate() const;
};

AaeModel build(const AaeConfig& config, const std::vector<std::string>& class_labels,
               const MixturePrior& prior);

// Runs the per-batch three-phase update: (1) encoder+decoder on the
// reconstruction MSE, (2) discriminator on prior-draw-vs-code cross-entropy
// with one-hot class conditioning, (3) encoder against the frozen
// discriminator. Owns the optimizer state, so one trainer must live for the
// whole run. Randomness comes from per-purpose streams derived from the
// config seed; the reconstruction phase never reads the adversarial streams.
class AaeTrainer {
 public:
  explicit AaeTrainer(AaeModel& model, bool adversarial = true);

  EpochLog train_epoch(const Dataset& train);
  int epochs_run() const { return epoch_; }
  double first_epoch_recon() const { return first_epoch_recon_; }

 private:
  struct BatchLosses {
    double recon = 0.0, disc = 0.0, gen = 0.0;
  };
  BatchLosses train_batch(const Matrix& inputs, const std::vector<int>& label_indices);

  AaeModel& model_;
  bool adversarial_;
  nn::Optimizer encoder_recon_opt_, decoder_opt_, discriminator_opt_, encoder_gen_opt_;
  std::optional<nn::Optimizer> encoder_phase2_opt_;
  Rng shuffle_rng_, recon_rng_, disc_rng_, gen_rng_;
  int epoch_ = 0;
  double first_epoch_recon_ = 0.0;
};

// Eval-mode deterministic maps.
Matrix encode(const AaeModel& model, const Matrix& features);
Matrix decode(const AaeModel& model, const Matrix& codes);

// per_class draws from every prior component, decoded to feature space.
// Labels follow the component labels; session and speaker ids are
// "synthetic". Features live in whatever space the model was trained in.
Dataset generate_synthetic(const AaeModel& model, int per_class, Rng& rng);

// The three losses in eval mode, no parameter updates. Fresh prior samples
// are drawn from rng for the adversarial terms.
EpochLog evaluate_losses(const AaeModel& model, const Dataset& data, Rng& rng);

// One-hot rows in the model's class-label order.
Matrix one_hot(const std::vector<int>& label_indices, int num_classes);

}  // namespace aae
