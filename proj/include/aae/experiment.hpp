#pragma once

#include "aae/aae.hpp"
#include "aae/baselines.hpp"
#include "aae/dataset.hpp"
#include "aae/svm.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace aae {

enum class Method { FullFeatures, AaeCodes, VanillaAe, Lda, Pca };
std::string method_name(Method method);

struct TuningGrid {
  std::vector<int> code_dims = {2};
  std::vector<int> baseline_dims = {2, 10, 100};
  std::vector<svm::KernelSpec> kernels;
  std::vector<double> boxes = {0.1, 1.0, 10.0};

  // linear plus rbf at {0.1, 1, 10}/D, boxes {0.1, 1, 10}.
  static TuningGrid defaults(int feature_dim);
  void validate() const;
};

struct ExperimentConfig {
  AaeConfig aae;  // input_dim and code_dim are overridden per fold/candidate
  double prior_radius = 4.0;
  double prior_stddev = 0.5;
  TuningGrid grid;
  int per_class = 100;  // synthetic draws per class (table 2)
  svm::SmoOptions smo;
  uint64_t seed = 0;
  int jobs = 1;
};

struct SelectedParams {
  int dim = 0;  // representation dimensionality (K for the AAE; D for full features)
  svm::KernelSpec kernel;
  double box = 1.0;
  double inner_uar = 0.0;
};

struct FoldResult {
  std::string test_session;
  // keyed by method/setting name
  std::map<std::string, double> uar;
  std::map<std::string, SelectedParams> selected;
  std::map<std::string, std::pair<int, int>> correct;  // (correct, n) on the test fold
  // Hash over everything the training side produced; must not depend on any
  // test-fold row.
  uint64_t train_digest = 0;
};

struct ExperimentReport {
  std::string experiment;
  std::vector<std::string> methods;  // row order for reporting
  std::vector<FoldResult> folds;
  std::map<std::string, double> mean_uar;
  std::map<std::string, double> p_values;
  uint64_t seed = 0;
  uint64_t config_hash = 0;
  std::vector<std::string> notes;
};

// Leave-one-session-out tuning inside the training fold. Candidates are the
// grid product of representation dimension and SVM kernel/box; ties break
// toward the smaller dimension, then the smaller box, then kernel order.
SelectedParams inner_tune(const Dataset& train_fold, const TuningGrid& grid, Method method,
                          const ExperimentConfig& config, uint64_t seed);

// Code-vector vs. baseline classification across session folds.
ExperimentReport run_table1(const Dataset& dataset, const ExperimentConfig& config);

// Synthetic-data classification: SVMs trained on synthetic-only, real-only
// and synthetic+real feature sets, evaluated on the held-out session.
ExperimentReport run_table2(const Dataset& dataset, const ExperimentConfig& config);

void write_report_csv(const ExperimentReport& report, const std::string& path);
void write_pvalues_csv(const ExperimentReport& report, const std::string& path);
void write_report_text(const ExperimentReport& report, std::ostream& out);

uint64_t hash_experiment_config(const ExperimentConfig& config);

}  // namespace aae
