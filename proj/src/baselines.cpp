#include "aae/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace aae {

EigenDecomposition jacobi_eigen(const Matrix& symmetric, double tolerance, int max_sweeps) {
  if (symmetric.rows() != symmetric.cols()) {
    throw ShapeError("jacobi_eigen: matrix must be square");
  }
  const Eigen::Index n = symmetric.rows();
  Matrix a = (symmetric + symmetric.transpose()) / 2.0;
  Matrix v = Matrix::Identity(n, n);

  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(off) <= tolerance * scale) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= tolerance * scale * 1e-6) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        // Smaller-angle root keeps the rotations stable.
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index lhs, Eigen::Index rhs) { return a(lhs, lhs) > a(rhs, rhs); });

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.eigenvectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
    // Deterministic sign: largest-magnitude entry positive.
    Eigen::Index arg_max = 0;
    out.eigenvectors.col(i).cwiseAbs().maxCoeff(&arg_max);
    if (out.eigenvectors(arg_max, i) < 0.0) out.eigenvectors.col(i) = -out.eigenvectors.col(i);
  }
  return out;
}

namespace {

std::vector<int> constant_columns(const Matrix& features) {
  std::vector<int> constants;
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    const double lo = features.col(c).minCoeff();
    const double hi = features.col(c).maxCoeff();
    if (lo == hi) constants.push_back(static_cast<int>(c));
  }
  return constants;
}

}  // namespace

PcaModel pca_fit(const Matrix& features, int d) {
  const Eigen::Index n = features.rows();
  const Eigen::Index dim = features.cols();
  if (n < 2) throw ValidationError("pca_fit: need at least 2 rows");
  if (d < 1 || d > std::min<Eigen::Index>(n, dim)) {
    throw ValidationError("pca_fit: d=" + std::to_string(d) + " must be in [1, min(N,D)] = [1, " +
                          std::to_string(std::min<Eigen::Index>(n, dim)) + "]");
  }
  const auto constants = constant_columns(features);
  if (constants.size() == static_cast<std::size_t>(dim)) {
    std::ostringstream msg;
    msg << "pca_fit: data has zero variance; constant feature indices:";
    for (int c : constants) msg << " " << c;
    throw DegenerateInputError(msg.str());
  }

  PcaModel model;
  model.mean = features.colwise().mean();
  const Matrix centered = features.rowwise() - model.mean.transpose();
  const Matrix covariance = centered.transpose() * centered / static_cast<double>(n - 1);
  const auto eig = jacobi_eigen(covariance);
  model.eigenvalues = eig.eigenvalues.cwiseMax(0.0);
  model.components = eig.eigenvectors.leftCols(d);
  return model;
}

Matrix pca_project(const PcaModel& model, const Matrix& features) {
  if (features.cols() != model.mean.size()) {
    throw ShapeError("pca_project: feature dimension mismatch");
  }
  return (features.rowwise() - model.mean.transpose()) * model.components;
}

Matrix pca_reconstruct(const PcaModel& model, const Matrix& projections) {
  if (projections.cols() != model.components.cols()) {
    throw ShapeError("pca_reconstruct: projection dimension mismatch");
  }
  return (projections * model.components.transpose()).rowwise() + model.mean.transpose();
}

LdaModel lda_fit(const Matrix& features, const std::vector<std::string>& labels, int d) {
  const Eigen::Index n = features.rows();
  const Eigen::Index dim = features.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw ShapeError("lda_fit: label count != row count");
  }
  std::map<std::string, std::vector<int>> by_class;
  for (int r = 0; r < n; ++r) by_class[labels[static_cast<std::size_t>(r)]].push_back(r);
  const int num_classes = static_cast<int>(by_class.size());
  if (num_classes < 2) throw ValidationError("lda_fit: need at least 2 classes");
  if (d < 1 || d > num_classes - 1) {
    throw ValidationError("lda_fit: d=" + std::to_string(d) + " must be in [1, C-1] = [1, " +
                          std::to_string(num_classes - 1) + "]");
  }
  for (const auto& [label, rows] : by_class) {
    if (rows.size() < 2) {
      throw ValidationError("lda_fit: class '" + label + "' has fewer than 2 rows");
    }
  }

  LdaModel model;
  model.mean = features.colwise().mean();
  Matrix within = Matrix::Zero(dim, dim);
  Matrix between = Matrix::Zero(dim, dim);
  for (const auto& [label, rows] : by_class) {
    Vector class_mean = Vector::Zero(dim);
    for (int r : rows) class_mean += features.row(r).transpose();
    class_mean /= static_cast<double>(rows.size());
    for (int r : rows) {
      const Vector diff = features.row(r).transpose() - class_mean;
      within += diff * diff.transpose();
    }
    const Vector offset = class_mean - model.mean;
    between += static_cast<double>(rows.size()) * offset * offset.transpose();
  }

  // Ridge keeps the within-class scatter invertible when D > N.
  double lambda = 1e-6 * within.trace() / static_cast<double>(dim);
  if (lambda <= 0.0) lambda = 1e-6;
  within += lambda * Matrix::Identity(dim, dim);

  const auto within_eig = jacobi_eigen(within);
  Matrix inv_sqrt = Matrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double value = std::max(within_eig.eigenvalues(i), lambda * 1e-3);
    inv_sqrt += within_eig.eigenvectors.col(i) * within_eig.eigenvectors.col(i).transpose() /
                std::sqrt(value);
  }
  const Matrix reduced = inv_sqrt * between * inv_sqrt;
  const auto eig = jacobi_eigen(reduced);

  model.projection.resize(dim, d);
  model.eigenvalues = eig.eigenvalues.head(d).cwiseMax(0.0);
  for (int i = 0; i < d; ++i) {
    Vector direction = inv_sqrt * eig.eigenvectors.col(i);
    const double norm = direction.norm();
    if (norm > 0.0) direction /= norm;
    Eigen::Index arg_max = 0;
    direction.cwiseAbs().maxCoeff(&arg_max);
    if (direction(arg_max) < 0.0) direction = -direction;
    model.projection.col(i) = direction;
  }
  return model;
}

Matrix lda_project(const LdaModel& model, const Matrix& features) {
  if (features.cols() != model.mean.size()) {
    throw ShapeError("lda_project: feature dimension mismatch");
  }
  return (features.rowwise() - model.mean.transpose()) * model.projection;
}

VanillaAeModel vanilla_ae_fit(const Matrix& features, const AaeConfig& config) {
  AaeConfig cfg = config;
  cfg.input_dim = static_cast<int>(features.cols());
  cfg.validate();
  // Placeholder prior and label set; phases 2-3 never run, so neither is
  // consulted. Init streams are per-network, so encoder/decoder parameters
  // match an adversarial build with the same seed exactly.
  const std::vector<std::string> dummy_labels = {"_"};
  const MixturePrior prior = MixturePrior::default_layout(dummy_labels, cfg.code_dim, 4.0, 0.5);
  AaeModel model = build(cfg, dummy_labels, prior);

  Dataset data;
  data.features = features;
  data.labels.assign(static_cast<std::size_t>(features.rows()), "_");
  data.session_ids.assign(static_cast<std::size_t>(features.rows()), "s0");
  data.speaker_ids.assign(static_cast<std::size_t>(features.rows()), "spk0");
  for (Eigen::Index dcol = 0; dcol < features.cols(); ++dcol) {
    data.feature_names.push_back("f" + std::to_string(dcol));
  }

  VanillaAeModel out;
  out.config = cfg;
  AaeTrainer trainer(model, /*adversarial=*/false);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    out.history.push_back(trainer.train_epoch(data));
    if (cfg.plateau_stopping && out.history.size() > 10) {
      const double prev = out.history[out.history.size() - 11].recon_mse;
      const double cur = out.history.back().recon_mse;
      if (prev > 0.0 && std::abs(cur - prev) / prev < 1e-4) break;
    }
  }
  out.encoder = std::move(model.encoder);
  out.decoder = std::move(model.decoder);
  return out;
}

Matrix vanilla_ae_encode(const VanillaAeModel& model, const Matrix& features) {
  if (features.cols() != model.encoder.input_dim()) {
    throw ShapeError("vanilla_ae_encode: feature dimension mismatch");
  }
  return nn::forward(model.encoder, features, nn::Mode::Eval, nullptr);
}

}  // namespace aae
