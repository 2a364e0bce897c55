#pragma once

#include "aae/aae.hpp"
#include "aae/dataset.hpp"

#include <optional>
#include <string>

namespace aae {

// On-disk model bundle: the trained networks plus everything needed to map
// raw features in and out (standardizer, feature names, held-out session).
// Binary little-endian layout, documented in the README; version gated.
struct ModelContainer {
  AaeModel model;
  std::optional<Standardizer> standardizer;
  std::vector<std::string> feature_names;
  std::string test_session;  // empty when the model was trained on all rows
};

inline constexpr uint32_t kModelFormatVersion = 1;

void save_model(const ModelContainer& container, const std::string& path);
ModelContainer load_model(const std::string& path);

}  // namespace aae
