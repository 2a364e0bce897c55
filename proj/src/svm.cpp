#include "aae/svm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace aae::svm {

KernelSpec KernelSpec::rbf(double gamma) {
  KernelSpec k{Kind::Rbf, gamma};
  k.validate();
  return k;
}

KernelSpec KernelSpec::parse(const std::string& text) {
  if (text == "linear") return linear();
  if (text.rfind("rbf:", 0) == 0) {
    try {
      return rbf(std::stod(text.substr(4)));
    } catch (const std::exception&) {
      throw ValidationError("bad rbf gamma in kernel spec '" + text + "'");
    }
  }
  throw ValidationError("unknown kernel spec '" + text + "' (expected 'linear' or 'rbf:<gamma>')");
}

std::string KernelSpec::to_string() const {
  return kind == Kind::Linear ? "linear" : "rbf:" + format_double(gamma);
}

void KernelSpec::validate() const {
  if (kind == Kind::Rbf && gamma <= 0.0) {
    throw ValidationError("rbf kernel: gamma must be positive");
  }
}

namespace {

double kernel_value(const KernelSpec& kernel, const RowVector& a, const RowVector& b) {
  if (kernel.kind == KernelSpec::Kind::Linear) return a.dot(b);
  return std::exp(-kernel.gamma * (a - b).squaredNorm());
}

Matrix kernel_matrix(const KernelSpec& kernel, const Matrix& x) {
  const Eigen::Index n = x.rows();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      k(i, j) = k(j, i) = kernel_value(kernel, x.row(i), x.row(j));
    }
  }
  return k;
}

}  // namespace

Vector BinarySvm::decision(const Matrix& features) const {
  if (support_vectors.rows() > 0 && features.cols() != support_vectors.cols()) {
    throw ShapeError("svm decision: feature dimension mismatch");
  }
  Vector out = Vector::Constant(features.rows(), bias);
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index s = 0; s < support_vectors.rows(); ++s) {
      out(i) += alphas(s) * sv_labels(s) *
                kernel_value(kernel, support_vectors.row(s), features.row(i));
    }
  }
  return out;
}

BinarySvm svm_fit(const Matrix& features, const Vector& labels, const KernelSpec& kernel,
                  double box, const SmoOptions& options) {
  kernel.validate();
  const Eigen::Index n = features.rows();
  if (labels.size() != n) throw ShapeError("svm_fit: label count != row count");
  if (box <= 0.0) throw ValidationError("svm_fit: box constraint must be positive");
  bool has_pos = false, has_neg = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels(i) == 1.0) {
      has_pos = true;
    } else if (labels(i) == -1.0) {
      has_neg = true;
    } else {
      throw ValidationError("svm_fit: labels must be +1/-1");
    }
  }
  if (!has_pos || !has_neg) throw ValidationError("svm_fit: both classes must be present");

  const Matrix k = kernel_matrix(kernel, features);
  Vector alpha = Vector::Zero(n);
  double b = 0.0;
  Rng rng(options.seed);

  auto decision_at = [&](Eigen::Index i) {
    double f = b;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (alpha(j) != 0.0) f += alpha(j) * labels(j) * k(j, i);
    }
    return f;
  };

  int quiet_passes = 0;
  int sweeps = 0;
  while (quiet_passes < options.max_passes && sweeps < options.max_sweeps) {
    int changed = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double error_i = decision_at(i) - labels(i);
      const double r = labels(i) * error_i;
      if (!((r < -options.tol && alpha(i) < box) || (r > options.tol && alpha(i) > 0.0))) {
        continue;
      }
      Eigen::Index j = static_cast<Eigen::Index>(rng.uniform_index(static_cast<uint64_t>(n - 1)));
      if (j >= i) ++j;
      const double error_j = decision_at(j) - labels(j);
      const double alpha_i_old = alpha(i);
      const double alpha_j_old = alpha(j);
      double lo, hi;
      if (labels(i) != labels(j)) {
        lo = std::max(0.0, alpha_j_old - alpha_i_old);
        hi = std::min(box, box + alpha_j_old - alpha_i_old);
      } else {
        lo = std::max(0.0, alpha_i_old + alpha_j_old - box);
        hi = std::min(box, alpha_i_old + alpha_j_old);
      }
      if (lo >= hi) continue;
      const double eta = 2.0 * k(i, j) - k(i, i) - k(j, j);
      if (eta >= 0.0) continue;
      double alpha_j_new = alpha_j_old - labels(j) * (error_i - error_j) / eta;
      alpha_j_new = std::clamp(alpha_j_new, lo, hi);
      if (std::abs(alpha_j_new - alpha_j_old) < 1e-5) continue;
      const double alpha_i_new = alpha_i_old + labels(i) * labels(j) * (alpha_j_old - alpha_j_new);
      // The pair update keeps both in [0, box] analytically; clamp the
      // floating-point drift.
      alpha(i) = std::clamp(alpha_i_new, 0.0, box);
      alpha(j) = std::clamp(alpha_j_new, 0.0, box);
      const double b1 = b - error_i - labels(i) * (alpha_i_new - alpha_i_old) * k(i, i) -
                        labels(j) * (alpha_j_new - alpha_j_old) * k(i, j);
      const double b2 = b - error_j - labels(i) * (alpha_i_new - alpha_i_old) * k(i, j) -
                        labels(j) * (alpha_j_new - alpha_j_old) * k(j, j);
      if (alpha_i_new > 0.0 && alpha_i_new < box) {
        b = b1;
      } else if (alpha_j_new > 0.0 && alpha_j_new < box) {
        b = b2;
      } else {
        b = (b1 + b2) / 2.0;
      }
      ++changed;
    }
    quiet_passes = changed == 0 ? quiet_passes + 1 : 0;
    ++sweeps;
  }

  BinarySvm model;
  model.kernel = kernel;
  model.box = box;
  model.bias = b;
  model.converged = quiet_passes >= options.max_passes;
  model.training_alphas = alpha;

  double objective = alpha.sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alpha(i) == 0.0) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (alpha(j) == 0.0) continue;
      objective -= 0.5 * alpha(i) * alpha(j) * labels(i) * labels(j) * k(i, j);
    }
  }
  model.dual_objective = objective;

  std::vector<Eigen::Index> sv_rows;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alpha(i) > 0.0) sv_rows.push_back(i);
  }
  model.support_vectors.resize(static_cast<Eigen::Index>(sv_rows.size()), features.cols());
  model.alphas.resize(static_cast<Eigen::Index>(sv_rows.size()));
  model.sv_labels.resize(static_cast<Eigen::Index>(sv_rows.size()));
  for (std::size_t s = 0; s < sv_rows.size(); ++s) {
    model.support_vectors.row(static_cast<Eigen::Index>(s)) = features.row(sv_rows[s]);
    model.alphas(static_cast<Eigen::Index>(s)) = alpha(sv_rows[s]);
    model.sv_labels(static_cast<Eigen::Index>(s)) = labels(sv_rows[s]);
  }
  return model;
}

MulticlassSvm svm_fit_multiclass(const Matrix& features, const std::vector<std::string>& labels,
                                 const KernelSpec& kernel, double box, const SmoOptions& options) {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
    throw ShapeError("svm_fit_multiclass: label count != row count");
  }
  std::set<std::string> distinct(labels.begin(), labels.end());
  MulticlassSvm model;
  model.label_order.assign(distinct.begin(), distinct.end());
  if (model.label_order.size() < 2) {
    throw ValidationError("svm_fit_multiclass: need at least 2 classes");
  }
  std::map<std::string, std::vector<Eigen::Index>> rows_by_label;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    rows_by_label[labels[r]].push_back(static_cast<Eigen::Index>(r));
  }

  const int num_classes = static_cast<int>(model.label_order.size());
  for (int a = 0; a < num_classes; ++a) {
    for (int bidx = a + 1; bidx < num_classes; ++bidx) {
      const auto& rows_a = rows_by_label[model.label_order[static_cast<std::size_t>(a)]];
      const auto& rows_b = rows_by_label[model.label_order[static_cast<std::size_t>(bidx)]];
      Matrix pair_features(static_cast<Eigen::Index>(rows_a.size() + rows_b.size()),
                           features.cols());
      Vector pair_labels(pair_features.rows());
      Eigen::Index out_row = 0;
      for (Eigen::Index r : rows_a) {
        pair_features.row(out_row) = features.row(r);
        pair_labels(out_row++) = 1.0;
      }
      for (Eigen::Index r : rows_b) {
        pair_features.row(out_row) = features.row(r);
        pair_labels(out_row++) = -1.0;
      }
      SmoOptions pair_options = options;
      pair_options.seed = derive_seed(options.seed, "ovo/" + std::to_string(a) + "/" +
                                                        std::to_string(bidx));
      MulticlassSvm::PairMachine machine;
      machine.first = a;
      machine.second = bidx;
      machine.svm = svm_fit(pair_features, pair_labels, kernel, box, pair_options);
      model.machines.push_back(std::move(machine));
    }
  }
  return model;
}

std::vector<std::string> svm_predict(const MulticlassSvm& model, const Matrix& features) {
  if (model.machines.empty()) throw ValidationError("svm_predict: model has no machines");
  const Eigen::Index n = features.rows();
  const int num_classes = static_cast<int>(model.label_order.size());
  Eigen::MatrixXi votes = Eigen::MatrixXi::Zero(n, num_classes);
  Matrix magnitudes = Matrix::Zero(n, num_classes);
  for (const auto& machine : model.machines) {
    const Vector decisions = machine.svm.decision(features);
    for (Eigen::Index r = 0; r < n; ++r) {
      const int winner = decisions(r) >= 0.0 ? machine.first : machine.second;
      votes(r, winner) += 1;
      magnitudes(r, winner) += std::abs(decisions(r));
    }
  }
  std::vector<std::string> predictions;
  predictions.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    int best = 0;
    for (int c = 1; c < num_classes; ++c) {
      if (votes(r, c) > votes(r, best) ||
          (votes(r, c) == votes(r, best) && magnitudes(r, c) > magnitudes(r, best))) {
        best = c;
      }
    }
    predictions.push_back(model.label_order[static_cast<std::size_t>(best)]);
  }
  return predictions;
}

ConfusionMatrix confusion(const std::vector<std::string>& truth,
                          const std::vector<std::string>& predicted,
                          const std::vector<std::string>& label_order) {
  if (truth.size() != predicted.size()) {
    throw ShapeError("confusion: truth and prediction lengths differ");
  }
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < label_order.size(); ++i) {
    index[label_order[i]] = static_cast<int>(i);
  }
  ConfusionMatrix cm;
  cm.label_order = label_order;
  cm.counts = Eigen::MatrixXi::Zero(static_cast<int>(label_order.size()),
                                    static_cast<int>(label_order.size()));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = index.find(truth[i]);
    if (t == index.end()) throw ValidationError("confusion: unknown true label '" + truth[i] + "'");
    const auto p = index.find(predicted[i]);
    if (p == index.end()) {
      throw ValidationError("confusion: unknown predicted label '" + predicted[i] + "'");
    }
    cm.counts(t->second, p->second) += 1;
  }
  return cm;
}

double uar(const ConfusionMatrix& cm) {
  const int num_classes = static_cast<int>(cm.counts.rows());
  double recall_sum = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    const int row_sum = cm.counts.row(c).sum();
    if (row_sum == 0) {
      throw ValidationError("uar: class '" + cm.label_order[static_cast<std::size_t>(c)] +
                            "' has no test rows");
    }
    recall_sum += static_cast<double>(cm.counts(c, c)) / row_sum;
  }
  return recall_sum / num_classes;
}

double two_proportion_test(int correct_a, int n_a, int correct_b, int n_b) {
  if (n_a <= 0 || n_b <= 0) throw ValidationError("two_proportion_test: sample sizes must be > 0");
  if (correct_a < 0 || correct_a > n_a || correct_b < 0 || correct_b > n_b) {
    throw ValidationError("two_proportion_test: correct counts must be within [0, n]");
  }
  const double p_a = static_cast<double>(correct_a) / n_a;
  const double p_b = static_cast<double>(correct_b) / n_b;
  const double pooled = static_cast<double>(correct_a + correct_b) / (n_a + n_b);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / n_a + 1.0 / n_b));
  if (se == 0.0) return 1.0;
  const double z = (p_a - p_b) / se;
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

}  // namespace aae::svm
