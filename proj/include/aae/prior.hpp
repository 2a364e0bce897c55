#pragma once

#include "aae/common.hpp"

#include <string>
#include <vector>

namespace aae {

struct GaussianComponent {
  Vector mean;
  Vector stddev;  // diagonal covariance
};

// The target code distribution p(z): one Gaussian component per class,
// uniform mixture weights. Immutable after construction.
class MixturePrior {
 public:
  MixturePrior(std::vector<GaussianComponent> components, std::vector<std::string> class_labels);

  // Component means on a circle of the given radius in the first two code
  // coordinates (zeros elsewhere), isotropic stddev. With code_dim == 1 only
  // up to two classes fit without collisions.
  static MixturePrior default_layout(const std::vector<std::string>& class_labels, int code_dim,
                                     double radius, double stddev);

  int code_dim() const { return static_cast<int>(components_.front().mean.size()); }
  int num_components() const { return static_cast<int>(components_.size()); }
  const std::vector<GaussianComponent>& components() const { return components_; }
  const std::vector<std::string>& class_labels() const { return class_labels_; }

  int component_index(const std::string& label) const;  // throws on unknown label
  const GaussianComponent& component_for(const std::string& label) const;

  // n i.i.d. draws from the labeled component, one row per draw.
  Matrix sample(const std::string& label, int n, Rng& rng) const;
  Matrix sample_component(int index, int n, Rng& rng) const;

  // Log of the uniformly weighted mixture density at z.
  double log_density(const Vector& z) const;

 private:
  std::vector<GaussianComponent> components_;
  std::vector<std::string> class_labels_;
};

}  // namespace aae
