#pragma once

#include "aae/common.hpp"

#include <string>
#include <vector>

namespace aae::svm {

struct KernelSpec {
  enum class Kind { Linear, Rbf };
  Kind kind = Kind::Linear;
  double gamma = 1.0;  // rbf only

  static KernelSpec linear() { return {Kind::Linear, 1.0}; }
  static KernelSpec rbf(double gamma);
  // "linear" or "rbf:<gamma>"
  static KernelSpec parse(const std::string& text);
  std::string to_string() const;
  void validate() const;
};

struct SmoOptions {
  double tol = 1e-3;
  int max_passes = 20;    // consecutive sweeps without an alpha change
  int max_sweeps = 2000;  // hard budget; exceeding it flags non-convergence
  uint64_t seed = 0;      // second-index selection
};

// One binary machine trained by simplified sequential minimal optimization.
struct BinarySvm {
  Matrix support_vectors;
  Vector alphas;     // per support vector, in (0, box]
  Vector sv_labels;  // per support vector, +-1
  double bias = 0.0;
  KernelSpec kernel;
  double box = 1.0;
  bool converged = true;
  double dual_objective = 0.0;
  Vector training_alphas;  // full alpha vector in training-row order

  Vector decision(const Matrix& features) const;
};

BinarySvm svm_fit(const Matrix& features, const Vector& labels /* +-1 */,
                  const KernelSpec& kernel, double box, const SmoOptions& options = {});

struct MulticlassSvm {
  struct PairMachine {
    int first = 0;   // label-order index voted for when decision > 0
    int second = 0;  // voted for when decision < 0
    BinarySvm svm;
  };
  std::vector<std::string> label_order;
  std::vector<PairMachine> machines;  // C*(C-1)/2, pairs in label order
};

MulticlassSvm svm_fit_multiclass(const Matrix& features, const std::vector<std::string>& labels,
                                 const KernelSpec& kernel, double box,
                                 const SmoOptions& options = {});

// One-vs-one majority vote; ties go to the larger summed |decision value|,
// then to the earlier label in label_order.
std::vector<std::string> svm_predict(const MulticlassSvm& model, const Matrix& features);

struct ConfusionMatrix {
  std::vector<std::string> label_order;
  Eigen::MatrixXi counts;  // rows = true label, cols = predicted
};

ConfusionMatrix confusion(const std::vector<std::string>& truth,
                          const std::vector<std::string>& predicted,
                          const std::vector<std::string>& label_order);

// Mean per-class recall.
double uar(const ConfusionMatrix& cm);

// Two-sided pooled two-proportion z-test.
double two_proportion_test(int correct_a, int n_a, int correct_b, int n_b);

}  // namespace aae::svm
