#include "aae/run_config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace aae {

namespace {

using nlohmann::json;

nn::OptimizerSettings parse_optimizer(const json& node, const nn::OptimizerSettings& base) {
  nn::OptimizerSettings opt = base;
  if (node.contains("optimizer")) {
    const std::string kind = node.at("optimizer").get<std::string>();
    if (kind == "adam") {
      opt.kind = nn::OptimizerSettings::Kind::Adam;
    } else if (kind == "sgd") {
      opt.kind = nn::OptimizerSettings::Kind::SgdMomentum;
    } else {
      throw ParseError("config: unknown optimizer '" + kind + "'");
    }
  }
  if (node.contains("learning_rate")) opt.learning_rate = node.at("learning_rate").get<double>();
  if (node.contains("momentum")) opt.momentum = node.at("momentum").get<double>();
  if (node.contains("beta1")) opt.beta1 = node.at("beta1").get<double>();
  if (node.contains("beta2")) opt.beta2 = node.at("beta2").get<double>();
  if (node.contains("epsilon")) opt.epsilon = node.at("epsilon").get<double>();
  return opt;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ParseError("config file " + path + ": " + e.what());
  }

  RunConfig config;
  try {
    if (root.contains("seed")) config.seed = root.at("seed").get<uint64_t>();
    if (root.contains("jobs")) config.jobs = root.at("jobs").get<int>();
    if (root.contains("output_dir")) config.output_dir = root.at("output_dir").get<std::string>();

    if (root.contains("data")) {
      const auto& data = root.at("data");
      if (data.contains("path")) config.data.path = data.at("path").get<std::string>();
      if (data.contains("format")) config.data.format = data.at("format").get<std::string>();
      if (data.contains("label_column")) {
        config.data.label_column = data.at("label_column").get<std::string>();
      }
      if (data.contains("session_column")) {
        config.data.session_column = data.at("session_column").get<std::string>();
      }
      if (data.contains("speaker_column")) {
        config.data.speaker_column = data.at("speaker_column").get<std::string>();
      }
      if (data.contains("session_pattern")) {
        config.data.arff.session_pattern = data.at("session_pattern").get<std::string>();
      }
      if (data.contains("speaker_pattern")) {
        config.data.arff.speaker_pattern = data.at("speaker_pattern").get<std::string>();
      }
      if (data.contains("delimiter")) {
        const std::string d = data.at("delimiter").get<std::string>();
        if (d.size() != 1) throw ParseError("config: delimiter must be a single character");
        config.data.delimiter = d[0];
      }
    }

    if (root.contains("aae")) {
      const auto& aae = root.at("aae");
      if (aae.contains("code_dim")) config.aae.code_dim = aae.at("code_dim").get<int>();
      if (aae.contains("hidden_width")) {
        config.aae.hidden_width = aae.at("hidden_width").get<int>();
      }
      if (aae.contains("hidden_depth")) {
        config.aae.hidden_depth = aae.at("hidden_depth").get<int>();
      }
      if (aae.contains("dropout_rate")) {
        config.aae.dropout_rate = aae.at("dropout_rate").get<double>();
      }
      if (aae.contains("batch_size")) config.aae.batch_size = aae.at("batch_size").get<int>();
      if (aae.contains("epochs")) config.aae.epochs = aae.at("epochs").get<int>();
      if (aae.contains("phase2_updates_encoder")) {
        config.aae.phase2_updates_encoder = aae.at("phase2_updates_encoder").get<bool>();
      }
      if (aae.contains("plateau_stopping")) {
        config.aae.plateau_stopping = aae.at("plateau_stopping").get<bool>();
      }
      if (aae.contains("test_session")) {
        config.test_session = aae.at("test_session").get<std::string>();
      }
      if (aae.contains("reconstruction")) {
        config.aae.reconstruction_opt =
            parse_optimizer(aae.at("reconstruction"), config.aae.reconstruction_opt);
      }
      if (aae.contains("discriminator")) {
        config.aae.discriminator_opt =
            parse_optimizer(aae.at("discriminator"), config.aae.discriminator_opt);
      }
      if (aae.contains("generator")) {
        config.aae.generator_opt = parse_optimizer(aae.at("generator"), config.aae.generator_opt);
      }
    }

    if (root.contains("prior")) {
      const auto& prior = root.at("prior");
      if (prior.contains("radius")) config.prior_radius = prior.at("radius").get<double>();
      if (prior.contains("stddev")) config.prior_stddev = prior.at("stddev").get<double>();
    }

    if (root.contains("grid")) {
      const auto& grid = root.at("grid");
      TuningGrid g;
      if (grid.contains("code_dims")) g.code_dims = grid.at("code_dims").get<std::vector<int>>();
      if (grid.contains("baseline_dims")) {
        g.baseline_dims = grid.at("baseline_dims").get<std::vector<int>>();
      }
      if (grid.contains("kernels")) {
        g.kernels.clear();
        for (const auto& k : grid.at("kernels")) {
          g.kernels.push_back(svm::KernelSpec::parse(k.get<std::string>()));
        }
      }
      if (grid.contains("boxes")) g.boxes = grid.at("boxes").get<std::vector<double>>();
      config.grid = std::move(g);
    }

    if (root.contains("experiment")) {
      const auto& experiment = root.at("experiment");
      if (experiment.contains("per_class")) {
        config.per_class = experiment.at("per_class").get<int>();
      }
    }

    if (root.contains("svm")) {
      const auto& svm_node = root.at("svm");
      if (svm_node.contains("tol")) config.smo.tol = svm_node.at("tol").get<double>();
      if (svm_node.contains("max_passes")) {
        config.smo.max_passes = svm_node.at("max_passes").get<int>();
      }
      if (svm_node.contains("max_sweeps")) {
        config.smo.max_sweeps = svm_node.at("max_sweeps").get<int>();
      }
      if (svm_node.contains("kernel")) {
        config.classify_kernel = svm::KernelSpec::parse(svm_node.at("kernel").get<std::string>());
      }
      if (svm_node.contains("box")) config.classify_box = svm_node.at("box").get<double>();
    }
  } catch (const json::exception& e) {
    throw ParseError("config file " + path + ": " + e.what());
  }
  return config;
}

uint64_t hash_run_config(const RunConfig& config) {
  std::ostringstream ss;
  ss << config.data.path << "|" << config.data.format << "|" << config.data.label_column << "|"
     << config.data.session_column << "|" << config.data.speaker_column << "|"
     << config.data.arff.session_pattern << "|" << config.data.arff.speaker_pattern << "|"
     << config.data.delimiter << "|" << config.aae.code_dim << "|" << config.aae.hidden_width
     << "|" << config.aae.hidden_depth << "|" << config.aae.dropout_rate << "|"
     << config.aae.batch_size << "|" << config.aae.epochs << "|"
     << config.aae.reconstruction_opt.learning_rate << "|"
     << config.aae.discriminator_opt.learning_rate << "|"
     << config.aae.generator_opt.learning_rate << "|" << config.aae.phase2_updates_encoder << "|"
     << config.aae.plateau_stopping << "|" << config.prior_radius << "|" << config.prior_stddev
     << "|" << config.per_class << "|" << config.smo.tol << "|" << config.smo.max_passes << "|"
     << config.smo.max_sweeps << "|" << config.classify_kernel.to_string() << "|"
     << config.classify_box << "|" << config.test_session << "|" << config.output_dir << "|"
     << (config.seed ? std::to_string(*config.seed) : "unset") << "|" << config.jobs;
  if (config.grid) {
    for (int d : config.grid->code_dims) ss << "|k" << d;
    for (int d : config.grid->baseline_dims) ss << "|d" << d;
    for (const auto& k : config.grid->kernels) ss << "|" << k.to_string();
    for (double b : config.grid->boxes) ss << "|b" << b;
  }
  return fnv1a64(ss.str());
}

ExperimentConfig to_experiment_config(const RunConfig& config, int feature_dim) {
  ExperimentConfig out;
  out.aae = config.aae;
  out.prior_radius = config.prior_radius;
  out.prior_stddev = config.prior_stddev;
  out.grid = config.grid ? *config.grid : TuningGrid::defaults(feature_dim);
  out.per_class = config.per_class;
  out.smo = config.smo;
  out.seed = config.seed.value_or(0);
  out.jobs = config.jobs;
  return out;
}

Dataset load_dataset(const DataConfig& data) {
  if (data.path.empty()) throw ValidationError("config: data.path is required");
  if (data.format == "csv") {
    return load_csv(data.path, data.label_column, data.session_column, data.speaker_column,
                    data.delimiter);
  }
  if (data.format == "arff") {
    return load_arff(data.path, data.arff);
  }
  throw ValidationError("config: unknown data format '" + data.format + "' (csv or arff)");
}

}  // namespace aae
