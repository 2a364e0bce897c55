#include "aae/model_io.hpp"

#include <cstring>
#include <fstream>

namespace aae {

namespace {

constexpr char kMagic[4] = {'A', 'A', 'E', 'C'};

void write_u8(std::ostream& out, uint8_t value) {
  out.put(static_cast<char>(value));
}

void write_u32(std::ostream& out, uint32_t value) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

void write_u64(std::ostream& out, uint64_t value) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

void write_f64(std::ostream& out, double value) {
  uint64_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  write_u64(out, bits);
}

void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint8_t read_u8(std::istream& in) {
  const int c = in.get();
  if (c == EOF) throw ParseError("model file truncated");
  return static_cast<uint8_t>(c);
}

uint32_t read_u32(std::istream& in) {
  char bytes[4];
  if (!in.read(bytes, 4)) throw ParseError("model file truncated");
  uint32_t value = 0;
  for (int i = 0; i < 4; ++i) {
    value |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
  }
  return value;
}

uint64_t read_u64(std::istream& in) {
  char bytes[8];
  if (!in.read(bytes, 8)) throw ParseError("model file truncated");
  uint64_t value = 0;
  for (int i = 0; i < 8; ++i) {
    value |= static_cast<uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
  }
  return value;
}

double read_f64(std::istream& in) {
  const uint64_t bits = read_u64(in);
  double value;
  std::memcpy(&value, &bits, sizeof(value));
  return value;
}

std::string read_string(std::istream& in) {
  const uint32_t size = read_u32(in);
  if (size > (1u << 20)) throw ParseError("model file: implausible string length");
  std::string s(size, '\0');
  if (size > 0 && !in.read(s.data(), size)) throw ParseError("model file truncated");
  return s;
}

void write_optimizer(std::ostream& out, const nn::OptimizerSettings& opt) {
  write_u8(out, opt.kind == nn::OptimizerSettings::Kind::Adam ? 1 : 0);
  write_f64(out, opt.learning_rate);
  write_f64(out, opt.momentum);
  write_f64(out, opt.beta1);
  write_f64(out, opt.beta2);
  write_f64(out, opt.epsilon);
}

nn::OptimizerSettings read_optimizer(std::istream& in) {
  nn::OptimizerSettings opt;
  opt.kind = read_u8(in) == 1 ? nn::OptimizerSettings::Kind::Adam
                              : nn::OptimizerSettings::Kind::SgdMomentum;
  opt.learning_rate = read_f64(in);
  opt.momentum = read_f64(in);
  opt.beta1 = read_f64(in);
  opt.beta2 = read_f64(in);
  opt.epsilon = read_f64(in);
  return opt;
}

void write_network(std::ostream& out, const nn::Network& net) {
  write_u32(out, static_cast<uint32_t>(net.num_layers()));
  for (const auto& layer : net.layers()) {
    write_u32(out, static_cast<uint32_t>(layer.dense.fan_in()));
    write_u32(out, static_cast<uint32_t>(layer.dense.fan_out()));
    uint8_t tag = 0;
    switch (layer.activation) {
      case nn::Activation::Identity: tag = 0; break;
      case nn::Activation::Relu: tag = 1; break;
      case nn::Activation::Tanh: tag = 2; break;
      case nn::Activation::Sigmoid: tag = 3; break;
    }
    write_u8(out, tag);
    write_f64(out, layer.dropout_rate);
    // Row-major weight dump.
    for (int r = 0; r < layer.dense.fan_in(); ++r) {
      for (int c = 0; c < layer.dense.fan_out(); ++c) {
        write_f64(out, layer.dense.weights(r, c));
      }
    }
    for (int c = 0; c < layer.dense.fan_out(); ++c) write_f64(out, layer.dense.bias(c));
  }
}

nn::Network read_network(std::istream& in) {
  const uint32_t num_layers = read_u32(in);
  if (num_layers == 0 || num_layers > 1024) {
    throw ParseError("model file: implausible layer count");
  }
  std::vector<nn::Layer> layers;
  for (uint32_t i = 0; i < num_layers; ++i) {
    const uint32_t fan_in = read_u32(in);
    const uint32_t fan_out = read_u32(in);
    if (fan_in == 0 || fan_out == 0 || fan_in > (1u << 20) || fan_out > (1u << 20)) {
      throw ParseError("model file: implausible layer dimensions");
    }
    nn::Layer layer;
    switch (read_u8(in)) {
      case 0: layer.activation = nn::Activation::Identity; break;
      case 1: layer.activation = nn::Activation::Relu; break;
      case 2: layer.activation = nn::Activation::Tanh; break;
      case 3: layer.activation = nn::Activation::Sigmoid; break;
      default: throw ParseError("model file: unknown activation tag");
    }
    layer.dropout_rate = read_f64(in);
    layer.dense.weights.resize(fan_in, fan_out);
    for (uint32_t r = 0; r < fan_in; ++r) {
      for (uint32_t c = 0; c < fan_out; ++c) layer.dense.weights(r, c) = read_f64(in);
    }
    layer.dense.bias.resize(fan_out);
    for (uint32_t c = 0; c < fan_out; ++c) layer.dense.bias(c) = read_f64(in);
    layers.push_back(std::move(layer));
  }
  return nn::Network(std::move(layers));
}

}  // namespace

void save_model(const ModelContainer& container, const std::string& path) {
  container.model.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file: " + path);

  out.write(kMagic, 4);
  write_u32(out, kModelFormatVersion);
  const auto& model = container.model;
  write_u32(out, static_cast<uint32_t>(model.config.input_dim));
  write_u32(out, static_cast<uint32_t>(model.config.code_dim));
  write_u32(out, static_cast<uint32_t>(model.num_classes()));
  for (const auto& label : model.class_labels) write_string(out, label);
  for (const auto& comp : model.prior.components()) {
    for (int c = 0; c < model.config.code_dim; ++c) write_f64(out, comp.mean(c));
    for (int c = 0; c < model.config.code_dim; ++c) write_f64(out, comp.stddev(c));
  }
  write_u32(out, static_cast<uint32_t>(model.config.hidden_width));
  write_u32(out, static_cast<uint32_t>(model.config.hidden_depth));
  write_f64(out, model.config.dropout_rate);
  write_u32(out, static_cast<uint32_t>(model.config.batch_size));
  write_u32(out, static_cast<uint32_t>(model.config.epochs));
  write_u8(out, model.config.phase2_updates_encoder ? 1 : 0);
  write_u8(out, model.config.plateau_stopping ? 1 : 0);
  write_u64(out, model.config.seed);
  write_optimizer(out, model.config.reconstruction_opt);
  write_optimizer(out, model.config.discriminator_opt);
  write_optimizer(out, model.config.generator_opt);

  write_u8(out, container.standardizer.has_value() ? 1 : 0);
  if (container.standardizer) {
    const auto& s = *container.standardizer;
    if (s.mean.size() != model.config.input_dim) {
      throw ValidationError("save_model: standardizer dimension != model input_dim");
    }
    for (int c = 0; c < model.config.input_dim; ++c) write_f64(out, s.mean(c));
    for (int c = 0; c < model.config.input_dim; ++c) write_f64(out, s.stddev(c));
    write_u32(out, static_cast<uint32_t>(s.constant_features.size()));
    for (int idx : s.constant_features) write_u32(out, static_cast<uint32_t>(idx));
  }
  write_u32(out, static_cast<uint32_t>(container.feature_names.size()));
  for (const auto& name : container.feature_names) write_string(out, name);
  write_string(out, container.test_session);

  write_network(out, model.encoder);
  write_network(out, model.decoder);
  write_network(out, model.discriminator);
  if (!out) throw IoError("failed writing model file: " + path);
}

ModelContainer load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("not a model file (bad magic): " + path);
  }
  const uint32_t version = read_u32(in);
  if (version != kModelFormatVersion) {
    throw ParseError("unsupported model format version " + std::to_string(version));
  }

  AaeConfig config;
  config.input_dim = static_cast<int>(read_u32(in));
  config.code_dim = static_cast<int>(read_u32(in));
  const uint32_t num_classes = read_u32(in);
  if (num_classes == 0 || num_classes > (1u << 16)) {
    throw ParseError("model file: implausible class count");
  }
  std::vector<std::string> class_labels;
  for (uint32_t i = 0; i < num_classes; ++i) class_labels.push_back(read_string(in));
  std::vector<GaussianComponent> components;
  for (uint32_t i = 0; i < num_classes; ++i) {
    GaussianComponent comp;
    comp.mean.resize(config.code_dim);
    comp.stddev.resize(config.code_dim);
    for (int c = 0; c < config.code_dim; ++c) comp.mean(c) = read_f64(in);
    for (int c = 0; c < config.code_dim; ++c) comp.stddev(c) = read_f64(in);
    components.push_back(std::move(comp));
  }
  config.hidden_width = static_cast<int>(read_u32(in));
  config.hidden_depth = static_cast<int>(read_u32(in));
  config.dropout_rate = read_f64(in);
  config.batch_size = static_cast<int>(read_u32(in));
  config.epochs = static_cast<int>(read_u32(in));
  config.phase2_updates_encoder = read_u8(in) == 1;
  config.plateau_stopping = read_u8(in) == 1;
  config.seed = read_u64(in);
  config.reconstruction_opt = read_optimizer(in);
  config.discriminator_opt = read_optimizer(in);
  config.generator_opt = read_optimizer(in);

  std::optional<Standardizer> standardizer;
  if (read_u8(in) == 1) {
    Standardizer s;
    s.mean.resize(config.input_dim);
    s.stddev.resize(config.input_dim);
    for (int c = 0; c < config.input_dim; ++c) s.mean(c) = read_f64(in);
    for (int c = 0; c < config.input_dim; ++c) s.stddev(c) = read_f64(in);
    const uint32_t num_const = read_u32(in);
    if (num_const > static_cast<uint32_t>(config.input_dim)) {
      throw ParseError("model file: implausible constant-feature count");
    }
    for (uint32_t i = 0; i < num_const; ++i) {
      s.constant_features.push_back(static_cast<int>(read_u32(in)));
    }
    standardizer = std::move(s);
  }
  const uint32_t num_names = read_u32(in);
  if (num_names > (1u << 24)) throw ParseError("model file: implausible feature-name count");
  std::vector<std::string> feature_names;
  for (uint32_t i = 0; i < num_names; ++i) feature_names.push_back(read_string(in));
  const std::string test_session = read_string(in);

  nn::Network encoder = read_network(in);
  nn::Network decoder = read_network(in);
  nn::Network discriminator = read_network(in);

  ModelContainer container{
      AaeModel{std::move(encoder), std::move(decoder), std::move(discriminator),
               MixturePrior(std::move(components), class_labels), config, class_labels},
      std::move(standardizer), std::move(feature_names), test_session};
  container.model.validate();
  return container;
}

}  // namespace aae
