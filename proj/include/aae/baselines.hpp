#pragma once

#include "aae/aae.hpp"
#include "aae/common.hpp"
#include "aae/nn.hpp"

#include <string>
#include <vector>

namespace aae {

// Input whose structure makes the requested fit meaningless, e.g. a feature
// table with zero total variance.
class DegenerateInputError : public ValidationError {
 public:
  explicit DegenerateInputError(const std::string& what) : ValidationError(what) {}
};

struct EigenDecomposition {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // orthonormal columns, eigenvectors.col(i) <-> eigenvalues(i)
};

// Cyclic Jacobi rotations for symmetric matrices.
EigenDecomposition jacobi_eigen(const Matrix& symmetric, double tolerance = 1e-10,
                                int max_sweeps = 100);

struct PcaModel {
  Vector mean;
  Matrix components;  // D x d, orthonormal columns by descending eigenvalue
  Vector eigenvalues; // all D, descending, clamped at 0
};

PcaModel pca_fit(const Matrix& features, int d);
Matrix pca_project(const PcaModel& model, const Matrix& features);
Matrix pca_reconstruct(const PcaModel& model, const Matrix& projections);

struct LdaModel {
  Vector mean;
  Matrix projection;  // D x d
  Vector eigenvalues; // generalized eigenvalues for the kept directions
};

// Fisher discriminant directions from the between- vs within-class scatter;
// the within-class scatter is ridge-regularized since D > N makes it
// singular on the target data.
LdaModel lda_fit(const Matrix& features, const std::vector<std::string>& labels, int d);
Matrix lda_project(const LdaModel& model, const Matrix& features);

// The non-adversarial baseline: same architecture and reconstruction phase
// as the adversarial model, phases 2 and 3 disabled.
struct VanillaAeModel {
  nn::Network encoder;
  nn::Network decoder;
  AaeConfig config;
  std::vector<EpochLog> history;
};

VanillaAeModel vanilla_ae_fit(const Matrix& features, const AaeConfig& config);
Matrix vanilla_ae_encode(const VanillaAeModel& model, const Matrix& features);

}  // namespace aae
