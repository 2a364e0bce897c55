#include "aae/aae.hpp"
#include "aae/baselines.hpp"
#include "aae/dataset.hpp"
#include "aae/experiment.hpp"
#include "aae/model_io.hpp"
#include "aae/nn.hpp"
#include "aae/run_config.hpp"
#include "aae/svm.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

namespace fs = std::filesystem;
using aae::RunConfig;

struct CommonFlags {
  std::string config_path;
  uint64_t seed = 0;
  std::string out;
  int jobs = 0;
  std::string format;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "config file (JSON)");
  cmd->add_option("--seed", flags.seed, "root random seed (overrides config)");
  cmd->add_option("--out", flags.out, "output directory (overrides config)");
  cmd->add_option("--jobs", flags.jobs, "max concurrent folds (overrides config)");
  cmd->add_option("--format", flags.format, "data format: csv or arff (overrides config)");
}

RunConfig resolve_config(const CLI::App* cmd, const CommonFlags& flags) {
  RunConfig config;
  if (!flags.config_path.empty()) config = aae::load_run_config(flags.config_path);
  if (cmd->count("--seed")) config.seed = flags.seed;
  if (cmd->count("--out")) config.output_dir = flags.out;
  if (cmd->count("--jobs")) config.jobs = flags.jobs;
  if (cmd->count("--format")) config.data.format = flags.format;
  return config;
}

uint64_t require_seed(const RunConfig& config) {
  if (!config.seed) {
    throw aae::ValidationError("a seed is required: set \"seed\" in the config or pass --seed");
  }
  return *config.seed;
}

fs::path ensure_out_dir(const RunConfig& config) {
  const fs::path dir(config.output_dir.empty() ? "out" : config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw aae::IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& config,
                    const std::vector<std::string>& artifacts) {
  nlohmann::json manifest;
  manifest["command"] = command;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(aae::hash_run_config(config)));
  manifest["config_hash"] = hash;
  if (config.seed) manifest["seed"] = *config.seed;
  manifest["artifacts"] = artifacts;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw aae::IoError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << "\n";
}

struct SplitDataset {
  aae::Dataset train;
  aae::Dataset test;
  std::string test_session;
};

SplitDataset split_for_training(const aae::Dataset& all, const std::string& requested_session) {
  SplitDataset split;
  const auto sessions = all.session_set();
  std::string test_session = requested_session;
  if (test_session.empty() && sessions.size() >= 2) test_session = sessions.back();
  if (!test_session.empty() &&
      std::find(sessions.begin(), sessions.end(), test_session) == sessions.end()) {
    throw aae::ValidationError("test session '" + test_session + "' not present in the data");
  }
  if (test_session.empty()) {
    // Single-session data: losses are logged on the training rows.
    split.train = all;
    split.test = all;
  } else {
    split.train = all.subset(all.rows_not_in_sessions({test_session}));
    split.test = all.subset(all.rows_in_sessions({test_session}));
    split.test_session = test_session;
  }
  return split;
}

int cmd_train(const CLI::App* cmd, const CommonFlags& flags) {
  const RunConfig config = resolve_config(cmd, flags);
  const uint64_t seed = require_seed(config);
  const fs::path out_dir = ensure_out_dir(config);

  const aae::Dataset all = aae::load_dataset(config.data);
  const SplitDataset split = split_for_training(all, config.test_session);

  const aae::Standardizer standardizer = aae::standardize_fit(split.train.features);
  aae::Dataset train_std = split.train;
  train_std.features = aae::standardize_apply(standardizer, split.train.features);
  aae::Dataset test_std = split.test;
  test_std.features = aae::standardize_apply(standardizer, split.test.features);

  const auto class_labels = split.train.class_set();
  aae::AaeConfig aae_config = config.aae;
  aae_config.input_dim = all.num_features();
  aae_config.seed = seed;
  const aae::MixturePrior prior = aae::MixturePrior::default_layout(
      class_labels, aae_config.code_dim, config.prior_radius, config.prior_stddev);
  aae::AaeModel model = aae::build(aae_config, class_labels, prior);

  aae::AaeTrainer trainer(model);
  std::vector<aae::EpochLog> logs;
  std::vector<double> train_recon;
  for (int epoch = 0; epoch < aae_config.epochs; ++epoch) {
    aae::EpochLog train_log = trainer.train_epoch(train_std);
    train_recon.push_back(train_log.recon_mse);
    logs.push_back(train_log);
    aae::Rng eval_rng(aae::derive_seed(seed, "eval/epoch" + std::to_string(train_log.epoch)));
    aae::EpochLog test_log = aae::evaluate_losses(model, test_std, eval_rng);
    test_log.epoch = train_log.epoch;
    test_log.split = "test";
    logs.push_back(test_log);
    std::cout << "epoch " << train_log.epoch << " recon " << train_log.recon_mse << " disc "
              << train_log.discriminator_ce << " gen " << train_log.generator_ce << "\n";
    if (aae_config.plateau_stopping && train_recon.size() > 10) {
      const double prev = train_recon[train_recon.size() - 11];
      const double cur = train_recon.back();
      if (prev > 0.0 && std::abs(cur - prev) / prev < 1e-4) {
        std::cout << "plateau reached, stopping at epoch " << train_log.epoch << "\n";
        break;
      }
    }
  }

  const aae::ModelContainer container{std::move(model), standardizer, all.feature_names,
                                      split.test_session};
  aae::save_model(container, (out_dir / "model.aae").string());
  aae::write_epoch_log_csv(logs, (out_dir / "epochs.csv").string());
  write_manifest(out_dir, "train", config, {"model.aae", "epochs.csv"});
  std::cout << "model written to " << (out_dir / "model.aae").string() << "\n";
  return 0;
}

int cmd_encode(const CLI::App* cmd, const CommonFlags& flags, const std::string& model_path) {
  const RunConfig config = resolve_config(cmd, flags);
  const fs::path out_dir = ensure_out_dir(config);
  const aae::ModelContainer container = aae::load_model(model_path);
  const aae::Dataset data = aae::load_dataset(config.data);
  if (data.num_features() != container.model.input_dim()) {
    throw aae::ValidationError("data has " + std::to_string(data.num_features()) +
                               " features, model expects " +
                               std::to_string(container.model.input_dim()));
  }
  const aae::Matrix features = container.standardizer
                                   ? aae::standardize_apply(*container.standardizer, data.features)
                                   : data.features;
  const aae::Matrix codes = aae::encode(container.model, features);

  const fs::path path = out_dir / "codes.csv";
  std::ofstream out(path);
  if (!out) throw aae::IoError("cannot write " + path.string());
  for (int k = 0; k < container.model.code_dim(); ++k) out << "z" << k << ",";
  out << "label,split\n";
  for (int r = 0; r < data.num_rows(); ++r) {
    for (int k = 0; k < container.model.code_dim(); ++k) {
      out << aae::format_double(codes(r, k)) << ",";
    }
    const bool is_test = !container.test_session.empty() &&
                         data.session_ids[static_cast<std::size_t>(r)] == container.test_session;
    out << data.labels[static_cast<std::size_t>(r)] << "," << (is_test ? "test" : "train") << "\n";
  }
  write_manifest(out_dir, "encode", config, {"codes.csv"});
  std::cout << "codes written to " << path.string() << "\n";
  return 0;
}

int cmd_decode(const CLI::App* cmd, const CommonFlags& flags, const std::string& model_path,
               const std::string& codes_path) {
  const RunConfig config = resolve_config(cmd, flags);
  const fs::path out_dir = ensure_out_dir(config);
  const aae::ModelContainer container = aae::load_model(model_path);
  const aae::Dataset codes = aae::load_csv(codes_path, "label", "split", "");
  if (codes.num_features() != container.model.code_dim()) {
    throw aae::ValidationError("codes file has " + std::to_string(codes.num_features()) +
                               " coordinates, model code_dim is " +
                               std::to_string(container.model.code_dim()));
  }
  aae::Matrix features = aae::decode(container.model, codes.features);
  if (container.standardizer) {
    features = aae::standardize_invert(*container.standardizer, features);
  }
  aae::Dataset decoded;
  decoded.features = std::move(features);
  decoded.feature_names = container.feature_names.size() ==
                                  static_cast<std::size_t>(container.model.input_dim())
                              ? container.feature_names
                              : std::vector<std::string>();
  if (decoded.feature_names.empty()) {
    for (int d = 0; d < container.model.input_dim(); ++d) {
      decoded.feature_names.push_back("f" + std::to_string(d));
    }
  }
  decoded.labels = codes.labels;
  decoded.session_ids.assign(codes.labels.size(), "decoded");
  decoded.speaker_ids.assign(codes.labels.size(), "decoded");
  const fs::path path = out_dir / "decoded.csv";
  aae::save_csv(decoded, path.string());
  write_manifest(out_dir, "decode", config, {"decoded.csv"});
  std::cout << "decoded features written to " << path.string() << "\n";
  return 0;
}

int cmd_generate(const CLI::App* cmd, const CommonFlags& flags, const std::string& model_path,
                 int per_class) {
  const RunConfig config = resolve_config(cmd, flags);
  const uint64_t seed = require_seed(config);
  const fs::path out_dir = ensure_out_dir(config);
  const aae::ModelContainer container = aae::load_model(model_path);
  aae::Rng rng(aae::derive_seed(seed, "generate"));
  aae::Dataset synthetic = aae::generate_synthetic(container.model, per_class, rng);
  if (container.standardizer) {
    synthetic.features = aae::standardize_invert(*container.standardizer, synthetic.features);
  }
  if (container.feature_names.size() == static_cast<std::size_t>(container.model.input_dim())) {
    synthetic.feature_names = container.feature_names;
  }
  const fs::path path = out_dir / "synthetic.csv";
  aae::save_csv(synthetic, path.string());
  write_manifest(out_dir, "generate", config, {"synthetic.csv"});
  std::cout << synthetic.num_rows() << " synthetic rows written to " << path.string() << "\n";
  return 0;
}

int cmd_classify(const CLI::App* cmd, const CommonFlags& flags) {
  const RunConfig config = resolve_config(cmd, flags);
  const uint64_t seed = require_seed(config);
  const fs::path out_dir = ensure_out_dir(config);
  const aae::Dataset data = aae::load_dataset(config.data);
  const aae::FoldPlan plan = aae::make_session_folds(data);
  const auto classes = data.class_set();

  const fs::path path = out_dir / "classify.csv";
  std::ofstream out(path);
  if (!out) throw aae::IoError("cannot write " + path.string());
  out << "fold,test_session,uar,correct,n\n";
  Eigen::MatrixXi pooled = Eigen::MatrixXi::Zero(static_cast<int>(classes.size()),
                                                 static_cast<int>(classes.size()));
  double uar_sum = 0.0;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto& fold = plan.folds[f];
    const aae::Dataset train = data.subset(data.rows_not_in_sessions(fold.test_sessions));
    const aae::Dataset test = data.subset(data.rows_in_sessions(fold.test_sessions));
    const aae::Standardizer standardizer = aae::standardize_fit(train.features);
    const aae::Matrix train_std = aae::standardize_apply(standardizer, train.features);
    const aae::Matrix test_std = aae::standardize_apply(standardizer, test.features);
    aae::svm::SmoOptions smo = config.smo;
    smo.seed = aae::derive_seed(seed, "classify/fold" + std::to_string(f));
    const auto model = aae::svm::svm_fit_multiclass(train_std, train.labels,
                                                    config.classify_kernel, config.classify_box,
                                                    smo);
    const auto predictions = aae::svm::svm_predict(model, test_std);
    const auto cm = aae::svm::confusion(test.labels, predictions, classes);
    const double fold_uar = aae::svm::uar(cm);
    uar_sum += fold_uar;
    pooled += cm.counts;
    int correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      if (predictions[i] == test.labels[i]) ++correct;
    }
    out << f << "," << *fold.test_sessions.begin() << "," << aae::format_double(fold_uar) << ","
        << correct << "," << test.num_rows() << "\n";
  }
  out << "mean,," << aae::format_double(uar_sum / static_cast<double>(plan.folds.size()))
      << ",,\n";

  const fs::path confusion_path = out_dir / "confusion.txt";
  std::ofstream ctxt(confusion_path);
  ctxt << "pooled confusion matrix (rows = true, cols = predicted)\n";
  ctxt << "labels:";
  for (const auto& label : classes) ctxt << " " << label;
  ctxt << "\n" << pooled << "\n";
  write_manifest(out_dir, "classify", config, {"classify.csv", "confusion.txt"});
  std::cout << "mean UAR " << uar_sum / static_cast<double>(plan.folds.size()) << "\n";
  return 0;
}

int cmd_experiment(const CLI::App* cmd, const CommonFlags& flags, const std::string& which) {
  const RunConfig config = resolve_config(cmd, flags);
  require_seed(config);
  const fs::path out_dir = ensure_out_dir(config);
  const aae::Dataset data = aae::load_dataset(config.data);
  const aae::ExperimentConfig experiment_config =
      aae::to_experiment_config(config, data.num_features());
  aae::ExperimentReport report;
  if (which == "table1") {
    report = aae::run_table1(data, experiment_config);
  } else if (which == "table2") {
    report = aae::run_table2(data, experiment_config);
  } else {
    throw aae::ValidationError("unknown experiment '" + which + "' (table1 or table2)");
  }
  const std::string base = "report_" + which;
  aae::write_report_csv(report, (out_dir / (base + ".csv")).string());
  aae::write_pvalues_csv(report, (out_dir / (base + "_pvalues.csv")).string());
  std::ofstream text(out_dir / (base + ".txt"));
  if (!text) throw aae::IoError("cannot write report text");
  aae::write_report_text(report, text);
  write_manifest(out_dir, "experiment " + which, config,
                 {base + ".csv", base + "_pvalues.csv", base + ".txt"});
  aae::write_report_text(report, std::cout);
  return 0;
}

int cmd_gradcheck(const CLI::App* cmd, const CommonFlags& flags, bool corrupt) {
  const RunConfig config = resolve_config(cmd, flags);
  const uint64_t seed = config.seed.value_or(0);
  const auto results = aae::nn::gradient_check_battery(seed, corrupt ? 1.0 : 0.0);
  bool all_passed = true;
  double worst = 0.0;
  for (const auto& result : results) {
    const bool pass = result.max_rel_error < 1e-4;
    all_passed = all_passed && pass;
    worst = std::max(worst, result.max_rel_error);
    std::cout << (pass ? "PASS" : "FAIL") << "  " << result.description << "  max rel error "
              << result.max_rel_error << "\n";
  }
  std::cout << (all_passed ? "gradient checks passed" : "gradient checks FAILED")
            << " (worst max rel error " << worst << ")\n";
  return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarial auto-encoder toolkit: compress emotion feature vectors, generate "
               "labeled synthetic features, and run the evaluation experiments"};
  app.require_subcommand(1);

  CommonFlags train_flags, encode_flags, decode_flags, generate_flags, classify_flags,
      experiment_flags, gradcheck_flags;
  std::string encode_model, decode_model, decode_codes, generate_model;
  int generate_per_class = 100;
  std::string experiment_which = "table1";
  bool gradcheck_corrupt = false;

  auto* train = app.add_subcommand("train", "train an adversarial auto-encoder");
  add_common_flags(train, train_flags);

  auto* encode = app.add_subcommand("encode", "encode a dataset into code vectors");
  add_common_flags(encode, encode_flags);
  encode->add_option("--model", encode_model, "model file")->required();

  auto* decode = app.add_subcommand("decode", "decode code vectors back to features");
  add_common_flags(decode, decode_flags);
  decode->add_option("--model", decode_model, "model file")->required();
  decode->add_option("--codes", decode_codes, "codes CSV (as written by encode)")->required();

  auto* generate = app.add_subcommand("generate", "sample labeled synthetic feature vectors");
  add_common_flags(generate, generate_flags);
  generate->add_option("--model", generate_model, "model file")->required();
  generate->add_option("--per-class", generate_per_class, "rows per class (default 100)");

  auto* classify = app.add_subcommand("classify", "session-fold SVM classification report");
  add_common_flags(classify, classify_flags);

  auto* experiment = app.add_subcommand("experiment", "run the table1/table2 evaluation");
  add_common_flags(experiment, experiment_flags);
  experiment->add_option("--which", experiment_which, "table1 or table2")->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "verify backprop against finite differences");
  add_common_flags(gradcheck, gradcheck_flags);
  gradcheck->add_flag("--corrupt", gradcheck_corrupt,
                      "negative control: corrupt the analytic gradients");

  try {
    app.parse(argc, argv);
    if (train->parsed()) return cmd_train(train, train_flags);
    if (encode->parsed()) return cmd_encode(encode, encode_flags, encode_model);
    if (decode->parsed()) return cmd_decode(decode, decode_flags, decode_model, decode_codes);
    if (generate->parsed()) {
      return cmd_generate(generate, generate_flags, generate_model, generate_per_class);
    }
    if (classify->parsed()) return cmd_classify(classify, classify_flags);
    if (experiment->parsed()) {
      return cmd_experiment(experiment, experiment_flags, experiment_which);
    }
    if (gradcheck->parsed()) return cmd_gradcheck(gradcheck, gradcheck_flags, gradcheck_corrupt);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const aae::TrainingDiverged& e) {
    std::cerr << "error: training diverged: " << e.what() << "\n";
    return 3;
  } catch (const aae::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const aae::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const aae::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
