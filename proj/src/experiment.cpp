#include "aae/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace aae {

std::string method_name(Method method) {
  switch (method) {
    case Method::FullFeatures: return "full_features";
    case Method::AaeCodes: return "aae_codes";
    case Method::VanillaAe: return "vanilla_ae";
    case Method::Lda: return "lda";
    case Method::Pca: return "pca";
  }
  return "unknown";
}

TuningGrid TuningGrid::defaults(int feature_dim) {
  TuningGrid grid;
  grid.code_dims = {2};
  grid.baseline_dims = {2, 10, 100};
  const double d = static_cast<double>(std::max(feature_dim, 1));
  grid.kernels = {svm::KernelSpec::linear(), svm::KernelSpec::rbf(0.1 / d),
                  svm::KernelSpec::rbf(1.0 / d), svm::KernelSpec::rbf(10.0 / d)};
  grid.boxes = {0.1, 1.0, 10.0};
  return grid;
}

void TuningGrid::validate() const {
  if (code_dims.empty() || baseline_dims.empty() || kernels.empty() || boxes.empty()) {
    throw ValidationError("tuning grid: every candidate list must be non-empty");
  }
  for (int d : code_dims) {
    if (d < 1 || d > 100) throw ValidationError("tuning grid: code dims must be in [1, 100]");
  }
  for (int d : baseline_dims) {
    if (d < 1 || d > 100) throw ValidationError("tuning grid: baseline dims must be in [1, 100]");
  }
  for (const auto& k : kernels) k.validate();
  for (double b : boxes) {
    if (b <= 0.0) throw ValidationError("tuning grid: boxes must be positive");
  }
}

namespace {

uint64_t digest_bytes(uint64_t h, const void* data, std::size_t size) {
  return fnv1a64(data, size, h);
}

uint64_t digest_matrix(uint64_t h, const Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    h = digest_bytes(h, m.col(c).data(), sizeof(double) * static_cast<std::size_t>(m.rows()));
  }
  return h;
}

uint64_t digest_vector(uint64_t h, const Vector& v) {
  return digest_bytes(h, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
}

uint64_t digest_network(uint64_t h, const nn::Network& net) {
  for (const auto& layer : net.layers()) {
    h = digest_matrix(h, layer.dense.weights);
    h = digest_bytes(h, layer.dense.bias.data(),
                     sizeof(double) * static_cast<std::size_t>(layer.dense.bias.size()));
  }
  return h;
}

uint64_t digest_standardizer(uint64_t h, const Standardizer& s) {
  h = digest_vector(h, s.mean);
  h = digest_vector(h, s.stddev);
  return h;
}

uint64_t digest_selected(uint64_t h, const SelectedParams& sel) {
  h = fnv1a64(std::to_string(sel.dim) + "/" + sel.kernel.to_string() + "/" +
                  format_double(sel.box),
              h);
  return h;
}

uint64_t digest_multiclass_svm(uint64_t h, const svm::MulticlassSvm& model) {
  for (const auto& machine : model.machines) {
    h = digest_bytes(h, &machine.svm.bias, sizeof(double));
    h = digest_vector(h, machine.svm.training_alphas);
  }
  return h;
}

// A trained feature->representation map plus a digest of what was learnt.
struct FittedRepresentation {
  std::function<Matrix(const Matrix&)> transform;
  int dim = 0;
  uint64_t digest = 0;
};

FittedRepresentation fit_representation(Method method, int dim, const Matrix& train_std,
                                        const std::vector<std::string>& train_labels,
                                        const ExperimentConfig& config, uint64_t seed) {
  FittedRepresentation rep;
  switch (method) {
    case Method::FullFeatures: {
      rep.transform = [](const Matrix& x) { return x; };
      rep.dim = static_cast<int>(train_std.cols());
      rep.digest = fnv1a64("full");
      break;
    }
    case Method::Pca: {
      auto model = std::make_shared<PcaModel>(pca_fit(train_std, dim));
      rep.transform = [model](const Matrix& x) { return pca_project(*model, x); };
      rep.dim = dim;
      rep.digest = digest_matrix(digest_vector(fnv1a64("pca"), model->mean), model->components);
      break;
    }
    case Method::Lda: {
      auto model = std::make_shared<LdaModel>(lda_fit(train_std, train_labels, dim));
      rep.transform = [model](const Matrix& x) { return lda_project(*model, x); };
      rep.dim = dim;
      rep.digest = digest_matrix(digest_vector(fnv1a64("lda"), model->mean), model->projection);
      break;
    }
    case Method::VanillaAe: {
      AaeConfig cfg = config.aae;
      cfg.input_dim = static_cast<int>(train_std.cols());
      cfg.code_dim = dim;
      cfg.seed = seed;
      auto model = std::make_shared<VanillaAeModel>(vanilla_ae_fit(train_std, cfg));
      rep.transform = [model](const Matrix& x) { return vanilla_ae_encode(*model, x); };
      rep.dim = dim;
      rep.digest = digest_network(fnv1a64("vanilla"), model->encoder);
      break;
    }
    case Method::AaeCodes: {
      std::set<std::string> classes(train_labels.begin(), train_labels.end());
      const std::vector<std::string> class_labels(classes.begin(), classes.end());
      AaeConfig cfg = config.aae;
      cfg.input_dim = static_cast<int>(train_std.cols());
      cfg.code_dim = dim;
      cfg.seed = seed;
      const MixturePrior prior = MixturePrior::default_layout(class_labels, dim,
                                                              config.prior_radius,
                                                              config.prior_stddev);
      auto model = std::make_shared<AaeModel>(build(cfg, class_labels, prior));
      Dataset train_ds;
      train_ds.features = train_std;
      train_ds.labels = train_labels;
      train_ds.session_ids.assign(train_labels.size(), "train");
      train_ds.speaker_ids.assign(train_labels.size(), "train");
      for (Eigen::Index c = 0; c < train_std.cols(); ++c) {
        train_ds.feature_names.push_back("f" + std::to_string(c));
      }
      AaeTrainer trainer(*model);
      std::vector<EpochLog> history;
      for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        history.push_back(trainer.train_epoch(train_ds));
        if (cfg.plateau_stopping && history.size() > 10) {
          const double prev = history[history.size() - 11].recon_mse;
          const double cur = history.back().recon_mse;
          if (prev > 0.0 && std::abs(cur - prev) / prev < 1e-4) break;
        }
      }
      rep.transform = [model](const Matrix& x) { return encode(*model, x); };
      rep.dim = dim;
      rep.digest = digest_network(fnv1a64("aae"), model->encoder);
      break;
    }
  }
  return rep;
}

// Mean recall over the classes that actually appear; the strict uar() is
// used on outer test folds, this one keeps inner tuning robust to a class
// missing from a small validation session.
double tolerant_uar(const std::vector<std::string>& truth,
                    const std::vector<std::string>& predicted,
                    const std::vector<std::string>& label_order) {
  const auto cm = svm::confusion(truth, predicted, label_order);
  double recall_sum = 0.0;
  int classes = 0;
  for (Eigen::Index c = 0; c < cm.counts.rows(); ++c) {
    const int row_sum = cm.counts.row(c).sum();
    if (row_sum == 0) continue;
    recall_sum += static_cast<double>(cm.counts(c, c)) / row_sum;
    ++classes;
  }
  if (classes == 0) throw ValidationError("tolerant_uar: no test rows at all");
  return recall_sum / classes;
}

std::vector<int> candidate_dims(Method method, const TuningGrid& grid, int num_classes,
                                int feature_dim) {
  std::vector<int> dims;
  switch (method) {
    case Method::FullFeatures:
      dims = {feature_dim};
      break;
    case Method::AaeCodes:
      dims = grid.code_dims;
      break;
    case Method::Lda: {
      // At most C-1 informative directions exist.
      std::set<int> unique;
      for (int d : grid.baseline_dims) unique.insert(std::min(d, num_classes - 1));
      dims.assign(unique.begin(), unique.end());
      break;
    }
    case Method::VanillaAe:
    case Method::Pca:
      dims = grid.baseline_dims;
      break;
  }
  std::sort(dims.begin(), dims.end());
  return dims;
}

svm::SmoOptions smo_options_with_seed(const ExperimentConfig& config, uint64_t seed) {
  svm::SmoOptions options = config.smo;
  options.seed = seed;
  return options;
}

}  // namespace

SelectedParams inner_tune(const Dataset& train_fold, const TuningGrid& grid, Method method,
                          const ExperimentConfig& config, uint64_t seed) {
  grid.validate();
  const auto sessions = train_fold.session_set();
  if (sessions.size() < 2) {
    throw ValidationError("inner_tune: training fold needs at least 2 sessions");
  }
  const auto classes = train_fold.class_set();
  const int feature_dim = train_fold.num_features();
  const auto dims = candidate_dims(method, grid, static_cast<int>(classes.size()), feature_dim);

  struct Candidate {
    int dim;
    std::size_t kernel_index;
    std::size_t box_index;
    double score_sum = 0.0;
  };
  std::vector<Candidate> candidates;
  for (int d : dims) {
    for (std::size_t k = 0; k < grid.kernels.size(); ++k) {
      for (std::size_t b = 0; b < grid.boxes.size(); ++b) {
        candidates.push_back({d, k, b, 0.0});
      }
    }
  }

  for (const auto& held_out : sessions) {
    const std::set<std::string> held{held_out};
    const Dataset inner_train = train_fold.subset(train_fold.rows_not_in_sessions(held));
    const Dataset inner_val = train_fold.subset(train_fold.rows_in_sessions(held));
    if (inner_train.num_rows() == 0 || inner_val.num_rows() == 0) continue;
    const Standardizer std_fit = standardize_fit(inner_train.features);
    const Matrix train_std = standardize_apply(std_fit, inner_train.features);
    const Matrix val_std = standardize_apply(std_fit, inner_val.features);

    for (int d : dims) {
      const uint64_t rep_seed = derive_seed(seed, "inner/" + held_out + "/dim" +
                                                      std::to_string(d));
      const auto rep =
          fit_representation(method, d, train_std, inner_train.labels, config, rep_seed);
      const Matrix rep_train = rep.transform(train_std);
      const Matrix rep_val = rep.transform(val_std);
      for (auto& candidate : candidates) {
        if (candidate.dim != d) continue;
        const auto& kernel = grid.kernels[candidate.kernel_index];
        const double box = grid.boxes[candidate.box_index];
        const auto model = svm::svm_fit_multiclass(
            rep_train, inner_train.labels, kernel, box,
            smo_options_with_seed(config, derive_seed(rep_seed, kernel.to_string() + "/" +
                                                                    format_double(box))));
        const auto predictions = svm::svm_predict(model, rep_val);
        candidate.score_sum += tolerant_uar(inner_val.labels, predictions, classes);
      }
    }
  }

  const Candidate* best = nullptr;
  for (const auto& candidate : candidates) {
    if (!best) {
      best = &candidate;
      continue;
    }
    if (candidate.score_sum > best->score_sum) {
      best = &candidate;
    } else if (candidate.score_sum == best->score_sum) {
      if (candidate.dim < best->dim ||
          (candidate.dim == best->dim &&
           (grid.boxes[candidate.box_index] < grid.boxes[best->box_index] ||
            (grid.boxes[candidate.box_index] == grid.boxes[best->box_index] &&
             candidate.kernel_index < best->kernel_index)))) {
        best = &candidate;
      }
    }
  }
  if (!best) throw ValidationError("inner_tune: empty candidate grid");
  SelectedParams out;
  out.dim = best->dim;
  out.kernel = grid.kernels[best->kernel_index];
  out.box = grid.boxes[best->box_index];
  out.inner_uar = best->score_sum / static_cast<double>(sessions.size());
  return out;
}

namespace {

void check_experiment_preconditions(const Dataset& dataset) {
  dataset.validate();
  if (dataset.session_set().size() < 2) {
    throw ValidationError("experiment: need at least 2 sessions");
  }
  if (dataset.class_set().size() < 2) {
    throw ValidationError("experiment: need at least 2 classes");
  }
}

void run_folds(int fold_count, int jobs, const std::function<void(int)>& body) {
  if (jobs <= 1 || fold_count <= 1) {
    for (int i = 0; i < fold_count; ++i) body(i);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(fold_count));
  for (int t = 0; t < std::min(jobs, fold_count); ++t) {
    workers.emplace_back([&, t]() {
      for (int i = t; i < fold_count; i += std::min(jobs, fold_count)) {
        try {
          body(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& worker : workers) worker.join();
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

void finalize_report(ExperimentReport& report) {
  for (const auto& method : report.methods) {
    double sum = 0.0;
    int count = 0;
    for (const auto& fold : report.folds) {
      const auto it = fold.uar.find(method);
      if (it != fold.uar.end()) {
        sum += it->second;
        ++count;
      }
    }
    if (count > 0) report.mean_uar[method] = sum / count;
  }
}

std::pair<int, int> pooled_correct(const ExperimentReport& report, const std::string& method) {
  int correct = 0, total = 0;
  for (const auto& fold : report.folds) {
    const auto it = fold.correct.find(method);
    if (it != fold.correct.end()) {
      correct += it->second.first;
      total += it->second.second;
    }
  }
  return {correct, total};
}

}  // namespace

ExperimentReport run_table1(const Dataset& dataset, const ExperimentConfig& config) {
  check_experiment_preconditions(dataset);
  config.grid.validate();
  const auto classes = dataset.class_set();
  const FoldPlan plan = make_session_folds(dataset);

  const std::vector<Method> methods = {Method::FullFeatures, Method::AaeCodes, Method::VanillaAe,
                                       Method::Lda, Method::Pca};
  ExperimentReport report;
  report.experiment = "table1";
  for (const auto method : methods) report.methods.push_back(method_name(method));
  report.seed = config.seed;
  report.config_hash = hash_experiment_config(config);
  report.folds.resize(plan.folds.size());

  run_folds(static_cast<int>(plan.folds.size()), config.jobs, [&](int fold_index) {
    const auto& fold = plan.folds[static_cast<std::size_t>(fold_index)];
    const std::string test_session = *fold.test_sessions.begin();
    const uint64_t fold_seed = derive_seed(config.seed, "fold/" + test_session);
    const Dataset train = dataset.subset(dataset.rows_not_in_sessions(fold.test_sessions));
    const Dataset test = dataset.subset(dataset.rows_in_sessions(fold.test_sessions));

    FoldResult result;
    result.test_session = test_session;
    const Standardizer standardizer = standardize_fit(train.features);
    const Matrix train_std = standardize_apply(standardizer, train.features);
    const Matrix test_std = standardize_apply(standardizer, test.features);
    uint64_t digest = digest_standardizer(fnv1a64("fold/" + test_session), standardizer);

    for (const auto method : methods) {
      const std::string name = method_name(method);
      const uint64_t method_seed = derive_seed(fold_seed, name);
      const SelectedParams selected =
          inner_tune(train, config.grid, method, config, method_seed);
      const auto rep = fit_representation(method, selected.dim, train_std, train.labels, config,
                                          derive_seed(method_seed, "final"));
      const Matrix rep_train = rep.transform(train_std);
      const Matrix rep_test = rep.transform(test_std);
      const auto model = svm::svm_fit_multiclass(
          rep_train, train.labels, selected.kernel, selected.box,
          smo_options_with_seed(config, derive_seed(method_seed, "final-svm")));
      const auto predictions = svm::svm_predict(model, rep_test);
      const auto cm = svm::confusion(test.labels, predictions, classes);
      result.uar[name] = svm::uar(cm);
      int correct = 0;
      for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == test.labels[i]) ++correct;
      }
      result.correct[name] = {correct, test.num_rows()};
      result.selected[name] = selected;

      digest = digest_selected(digest, selected);
      digest = digest_bytes(digest, &rep.digest, sizeof(rep.digest));
      digest = digest_multiclass_svm(digest, model);
    }
    result.train_digest = digest;
    report.folds[static_cast<std::size_t>(fold_index)] = std::move(result);
  });

  finalize_report(report);
  const auto [full_correct, full_n] = pooled_correct(report, "full_features");
  const auto [code_correct, code_n] = pooled_correct(report, "aae_codes");
  report.p_values["full_features_vs_aae_codes"] =
      svm::two_proportion_test(full_correct, full_n, code_correct, code_n);
  report.notes.push_back(
      "significance tests compare pooled per-utterance correctness proportions, not UAR");
  return report;
}

ExperimentReport run_table2(const Dataset& dataset, const ExperimentConfig& config) {
  check_experiment_preconditions(dataset);
  config.grid.validate();
  if (config.per_class < 1) {
    throw ValidationError("run_table2: per_class must be >= 1");
  }
  const auto classes = dataset.class_set();
  const int num_classes = static_cast<int>(classes.size());
  const FoldPlan plan = make_session_folds(dataset);

  ExperimentReport report;
  report.experiment = "table2";
  report.methods = {"chance", "synthetic_only", "real_only", "synthetic_plus_real"};
  report.seed = config.seed;
  report.config_hash = hash_experiment_config(config);
  report.folds.resize(plan.folds.size());

  run_folds(static_cast<int>(plan.folds.size()), config.jobs, [&](int fold_index) {
    const auto& fold = plan.folds[static_cast<std::size_t>(fold_index)];
    const std::string test_session = *fold.test_sessions.begin();
    const uint64_t fold_seed = derive_seed(config.seed, "fold/" + test_session);
    const Dataset train = dataset.subset(dataset.rows_not_in_sessions(fold.test_sessions));
    const Dataset test = dataset.subset(dataset.rows_in_sessions(fold.test_sessions));

    FoldResult result;
    result.test_session = test_session;
    const Standardizer standardizer = standardize_fit(train.features);
    const Matrix train_std = standardize_apply(standardizer, train.features);
    const Matrix test_std = standardize_apply(standardizer, test.features);
    uint64_t digest = digest_standardizer(fnv1a64("fold/" + test_session), standardizer);

    // K is tuned on code-vector classification, the SVM kernel/box on the
    // full feature representation that the three trainings below share.
    const SelectedParams aae_selected =
        inner_tune(train, config.grid, Method::AaeCodes, config, derive_seed(fold_seed, "aae"));
    const SelectedParams svm_selected = inner_tune(train, config.grid, Method::FullFeatures,
                                                   config, derive_seed(fold_seed, "svm"));
    digest = digest_selected(digest, aae_selected);
    digest = digest_selected(digest, svm_selected);

    const auto rep =
        fit_representation(Method::AaeCodes, aae_selected.dim, train_std, train.labels, config,
                           derive_seed(fold_seed, "generator"));
    digest = digest_bytes(digest, &rep.digest, sizeof(rep.digest));

    // fit_representation keeps the trained model behind the transform; for
    // generation the decoder is needed, so table 2 retrains explicitly.
    std::set<std::string> class_set(train.labels.begin(), train.labels.end());
    const std::vector<std::string> class_labels(class_set.begin(), class_set.end());
    AaeConfig cfg = config.aae;
    cfg.input_dim = train.num_features();
    cfg.code_dim = aae_selected.dim;
    cfg.seed = derive_seed(fold_seed, "generator");
    const MixturePrior prior = MixturePrior::default_layout(class_labels, cfg.code_dim,
                                                            config.prior_radius,
                                                            config.prior_stddev);
    AaeModel model = build(cfg, class_labels, prior);
    Dataset train_ds = train;
    train_ds.features = train_std;
    AaeTrainer trainer(model);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) trainer.train_epoch(train_ds);
    digest = digest_network(digest, model.encoder);
    digest = digest_network(digest, model.decoder);

    Rng sample_rng(derive_seed(fold_seed, "synthetic-draws"));
    const Dataset synthetic = generate_synthetic(model, config.per_class, sample_rng);

    struct Setting {
      std::string name;
      const Matrix* features;
      const std::vector<std::string>* labels;
    };
    Matrix combined_features(train_std.rows() + synthetic.features.rows(), train_std.cols());
    combined_features.topRows(train_std.rows()) = train_std;
    combined_features.bottomRows(synthetic.features.rows()) = synthetic.features;
    std::vector<std::string> combined_labels = train.labels;
    combined_labels.insert(combined_labels.end(), synthetic.labels.begin(),
                           synthetic.labels.end());
    const std::vector<Setting> settings = {
        {"synthetic_only", &synthetic.features, &synthetic.labels},
        {"real_only", &train_std, &train.labels},
        {"synthetic_plus_real", &combined_features, &combined_labels},
    };
    for (const auto& setting : settings) {
      const auto svm_model = svm::svm_fit_multiclass(
          *setting.features, *setting.labels, svm_selected.kernel, svm_selected.box,
          smo_options_with_seed(config, derive_seed(fold_seed, "svm/" + setting.name)));
      const auto predictions = svm::svm_predict(svm_model, test_std);
      const auto cm = svm::confusion(test.labels, predictions, classes);
      result.uar[setting.name] = svm::uar(cm);
      int correct = 0;
      for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == test.labels[i]) ++correct;
      }
      result.correct[setting.name] = {correct, test.num_rows()};
      result.selected[setting.name] = setting.name == "synthetic_only" ||
                                              setting.name == "synthetic_plus_real"
                                          ? aae_selected
                                          : svm_selected;
      digest = digest_multiclass_svm(digest, svm_model);
    }
    result.uar["chance"] = 1.0 / num_classes;
    const int chance_correct =
        static_cast<int>(std::lround(static_cast<double>(test.num_rows()) / num_classes));
    result.correct["chance"] = {chance_correct, test.num_rows()};
    result.train_digest = digest;
    report.folds[static_cast<std::size_t>(fold_index)] = std::move(result);
  });

  finalize_report(report);
  const auto [synth_correct, synth_n] = pooled_correct(report, "synthetic_only");
  const auto [chance_correct, chance_n] = pooled_correct(report, "chance");
  const auto [real_correct, real_n] = pooled_correct(report, "real_only");
  const auto [both_correct, both_n] = pooled_correct(report, "synthetic_plus_real");
  report.p_values["synthetic_only_vs_chance"] =
      svm::two_proportion_test(synth_correct, synth_n, chance_correct, chance_n);
  report.p_values["synthetic_plus_real_vs_real_only"] =
      svm::two_proportion_test(both_correct, both_n, real_correct, real_n);
  report.notes.push_back(
      "significance tests compare pooled per-utterance correctness proportions, not UAR");
  report.notes.push_back("chance correctness is n/C per fold, rounded");
  return report;
}

void write_report_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  out << "experiment,method,fold,test_session,uar,dim,kernel,box,correct,n\n";
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    const auto& fold = report.folds[f];
    for (const auto& method : report.methods) {
      const auto uar_it = fold.uar.find(method);
      if (uar_it == fold.uar.end()) continue;
      out << report.experiment << "," << method << "," << f << "," << fold.test_session << ","
          << format_double(uar_it->second) << ",";
      const auto sel_it = fold.selected.find(method);
      if (sel_it != fold.selected.end()) {
        out << sel_it->second.dim << "," << sel_it->second.kernel.to_string() << ","
            << format_double(sel_it->second.box);
      } else {
        out << ",,";
      }
      const auto correct_it = fold.correct.find(method);
      if (correct_it != fold.correct.end()) {
        out << "," << correct_it->second.first << "," << correct_it->second.second;
      } else {
        out << ",,";
      }
      out << "\n";
    }
  }
  for (const auto& method : report.methods) {
    const auto it = report.mean_uar.find(method);
    if (it == report.mean_uar.end()) continue;
    out << report.experiment << "," << method << ",mean,," << format_double(it->second)
        << ",,,,,\n";
  }
  if (!out) throw IoError("failed writing report: " + path);
}

void write_pvalues_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write p-value table: " + path);
  out << "comparison,p_value\n";
  for (const auto& [name, p] : report.p_values) {
    out << name << "," << format_double(p) << "\n";
  }
}

void write_report_text(const ExperimentReport& report, std::ostream& out) {
  out << "experiment: " << report.experiment << "  (seed " << report.seed << ", config hash "
      << std::hex << report.config_hash << std::dec << ")\n\n";
  out << std::left << std::setw(22) << "method";
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    out << std::right << std::setw(10) << ("fold" + std::to_string(f));
  }
  out << std::right << std::setw(10) << "mean" << "\n";
  for (const auto& method : report.methods) {
    out << std::left << std::setw(22) << method;
    for (const auto& fold : report.folds) {
      const auto it = fold.uar.find(method);
      if (it != fold.uar.end()) {
        out << std::right << std::setw(10) << std::fixed << std::setprecision(4) << it->second;
      } else {
        out << std::right << std::setw(10) << "-";
      }
    }
    const auto mean_it = report.mean_uar.find(method);
    if (mean_it != report.mean_uar.end()) {
      out << std::right << std::setw(10) << std::fixed << std::setprecision(4)
          << mean_it->second;
    } else {
      out << std::right << std::setw(10) << "-";
    }
    out << "\n";
  }
  out.unsetf(std::ios::fixed);
  out << "\nselected hyperparameters\n";
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    const auto& fold = report.folds[f];
    out << "  fold " << f << " (test " << fold.test_session << ")\n";
    for (const auto& method : report.methods) {
      const auto it = fold.selected.find(method);
      if (it == fold.selected.end()) continue;
      out << "    " << std::left << std::setw(20) << method << " dim=" << it->second.dim
          << " kernel=" << it->second.kernel.to_string() << " box=" << it->second.box << "\n";
    }
  }
  if (!report.p_values.empty()) {
    out << "\np-values (two-sided two-proportion z-test)\n";
    for (const auto& [name, p] : report.p_values) {
      out << "  " << std::left << std::setw(40) << name << format_double(p) << "\n";
    }
  }
  for (const auto& note : report.notes) out << "note: " << note << "\n";
}

uint64_t hash_experiment_config(const ExperimentConfig& config) {
  std::ostringstream ss;
  ss << config.aae.code_dim << "|" << config.aae.hidden_width << "|" << config.aae.hidden_depth
     << "|" << config.aae.dropout_rate << "|" << config.aae.batch_size << "|"
     << config.aae.epochs << "|" << config.aae.reconstruction_opt.learning_rate << "|"
     << config.aae.discriminator_opt.learning_rate << "|"
     << config.aae.generator_opt.learning_rate << "|" << config.aae.phase2_updates_encoder
     << "|" << config.prior_radius << "|" << config.prior_stddev << "|" << config.per_class
     << "|" << config.seed << "|" << config.smo.tol << "|" << config.smo.max_passes;
  for (int d : config.grid.code_dims) ss << "|k" << d;
  for (int d : config.grid.baseline_dims) ss << "|d" << d;
  for (const auto& k : config.grid.kernels) ss << "|" << k.to_string();
  for (double b : config.grid.boxes) ss << "|b" << b;
  return fnv1a64(ss.str());
}

}  // namespace aae
