#pragma once

#include "aae/aae.hpp"
#include "aae/dataset.hpp"
#include "aae/experiment.hpp"
#include "aae/svm.hpp"

#include <optional>
#include <string>

namespace aae {

struct DataConfig {
  std::string path;
  std::string format = "csv";  // csv | arff
  std::string label_column = "label";
  std::string session_column = "session";
  std::string speaker_column = "speaker";
  ArffOptions arff;
  char delimiter = ',';
};

// One config file drives every subcommand; command-line flags override it.
struct RunConfig {
  DataConfig data;
  AaeConfig aae;
  double prior_radius = 4.0;
  double prior_stddev = 0.5;
  std::optional<TuningGrid> grid;  // absent -> TuningGrid::defaults(D)
  int per_class = 100;
  svm::SmoOptions smo;
  svm::KernelSpec classify_kernel = svm::KernelSpec::linear();
  double classify_box = 1.0;
  std::string test_session;  // train-command holdout; empty -> last session
  std::string output_dir = "out";
  std::optional<uint64_t> seed;  // must be explicit: config or --seed
  int jobs = 1;
};

RunConfig load_run_config(const std::string& path);

// Canonical hash of the effective configuration, echoed into every manifest
// and report so outputs can be traced to the exact settings.
uint64_t hash_run_config(const RunConfig& config);

ExperimentConfig to_experiment_config(const RunConfig& config, int feature_dim);

Dataset load_dataset(const DataConfig& data);

}  // namespace aae
