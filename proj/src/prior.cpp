#include "aae/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace aae {

MixturePrior::MixturePrior(std::vector<GaussianComponent> components,
                           std::vector<std::string> class_labels)
    : components_(std::move(components)), class_labels_(std::move(class_labels)) {
  if (components_.empty()) throw ValidationError("prior needs at least one component");
  if (components_.size() != class_labels_.size()) {
    throw ValidationError("prior: component count " + std::to_string(components_.size()) +
                          " != class label count " + std::to_string(class_labels_.size()));
  }
  std::set<std::string> unique(class_labels_.begin(), class_labels_.end());
  if (unique.size() != class_labels_.size()) {
    throw ValidationError("prior: class labels must be distinct");
  }
  const auto k = components_.front().mean.size();
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const auto& c = components_[i];
    if (c.mean.size() != k || c.stddev.size() != k) {
      throw ShapeError("prior component " + std::to_string(i) + ": mean/stddev length mismatch");
    }
    if ((c.stddev.array() <= 0.0).any()) {
      throw ValidationError("prior component " + std::to_string(i) + ": stddev must be positive");
    }
  }
}

MixturePrior MixturePrior::default_layout(const std::vector<std::string>& class_labels,
                                          int code_dim, double radius, double stddev) {
  if (class_labels.empty()) throw ValidationError("default_layout: needs at least one class");
  if (code_dim < 1) throw ValidationError("default_layout: code_dim must be positive");
  if (radius <= 0.0) throw ValidationError("default_layout: radius must be positive");
  if (stddev <= 0.0) throw ValidationError("default_layout: stddev must be positive");
  const int num_classes = static_cast<int>(class_labels.size());
  if (code_dim == 1 && num_classes > 2) {
    throw ValidationError("default_layout: code_dim 1 supports at most 2 classes");
  }
  std::vector<GaussianComponent> components;
  components.reserve(class_labels.size());
  for (int c = 0; c < num_classes; ++c) {
    const double angle = 2.0 * M_PI * c / num_classes;
    Vector mean = Vector::Zero(code_dim);
    mean(0) = radius * std::cos(angle);
    if (code_dim >= 2) mean(1) = radius * std::sin(angle);
    components.push_back({std::move(mean), Vector::Constant(code_dim, stddev)});
  }
  return MixturePrior(std::move(components), class_labels);
}

int MixturePrior::component_index(const std::string& label) const {
  const auto it = std::find(class_labels_.begin(), class_labels_.end(), label);
  if (it == class_labels_.end()) {
    throw ValidationError("prior: unknown class label '" + label + "'");
  }
  return static_cast<int>(it - class_labels_.begin());
}

const GaussianComponent& MixturePrior::component_for(const std::string& label) const {
  return components_[component_index(label)];
}

Matrix MixturePrior::sample(const std::string& label, int n, Rng& rng) const {
  return sample_component(component_index(label), n, rng);
}

Matrix MixturePrior::sample_component(int index, int n, Rng& rng) const {
  if (index < 0 || index >= num_components()) {
    throw ValidationError("prior: component index out of range");
  }
  if (n < 1) throw ValidationError("prior: sample count must be >= 1");
  const auto& comp = components_[index];
  const int k = code_dim();
  Matrix draws(n, k);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < k; ++c) {
      draws(r, c) = comp.mean(c) + comp.stddev(c) * rng.normal();
    }
  }
  return draws;
}

double MixturePrior::log_density(const Vector& z) const {
  if (z.size() != code_dim()) {
    throw ShapeError("log_density: z has length " + std::to_string(z.size()) +
                     " but code_dim is " + std::to_string(code_dim()));
  }
  const double log_weight = -std::log(static_cast<double>(num_components()));
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const auto& comp = components_[i];
    double log_pdf = -0.5 * code_dim() * std::log(2.0 * M_PI);
    for (int c = 0; c < code_dim(); ++c) {
      const double u = (z(c) - comp.mean(c)) / comp.stddev(c);
      log_pdf -= std::log(comp.stddev(c)) + 0.5 * u * u;
    }
    terms[i] = log_weight + log_pdf;
    max_term = std::max(max_term, terms[i]);
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - max_term);
  return max_term + std::log(sum);
}

}  // namespace aae
