#include <doctest.h>

#include "aae/baselines.hpp"
#include "aae/dataset.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace aae;

namespace {

Matrix random_matrix(int rows, int cols, uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

double direction_mismatch(const Vector& a, const Vector& b) {
  const Vector an = a.normalized();
  const Vector bn = b.normalized();
  return std::min((an - bn).norm(), (an + bn).norm());
}

}  // namespace

TEST_CASE("jacobi_eigen: matches the characteristic-polynomial oracle") {
  for (int n : {3, 5}) {
    const Matrix base = random_matrix(n, n, 100 + static_cast<uint64_t>(n));
    const Matrix symmetric = (base + base.transpose()) / 2.0;
    const auto mine = jacobi_eigen(symmetric);
    const auto oracle = oracles::charpoly_eigen(symmetric);
    REQUIRE(static_cast<int>(oracle.size()) == n);
    for (int i = 0; i < n; ++i) {
      CHECK(mine.eigenvalues(i) == doctest::Approx(oracle[static_cast<std::size_t>(i)].value)
                                       .epsilon(1e-8));
      CHECK(direction_mismatch(mine.eigenvectors.col(i),
                               oracle[static_cast<std::size_t>(i)].vector) < 1e-6);
    }
    // Orthonormality and reconstruction.
    CHECK((mine.eigenvectors.transpose() * mine.eigenvectors - Matrix::Identity(n, n))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    const Matrix rebuilt = mine.eigenvectors * mine.eigenvalues.asDiagonal() *
                           mine.eigenvectors.transpose();
    CHECK((rebuilt - symmetric).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("pca_fit: two points define the diagonal component") {
  Matrix points(2, 2);
  points << 0.0, 0.0, 2.0, 2.0;
  const PcaModel model = pca_fit(points, 1);
  const Vector expected = Vector::Constant(2, 1.0 / std::sqrt(2.0));
  CHECK(direction_mismatch(model.components.col(0), expected) < 1e-12);
}

TEST_CASE("pca_fit: isotropic data has equal eigenvalues") {
  Matrix points(4, 2);
  points << 1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0;
  const PcaModel model = pca_fit(points, 2);
  CHECK(model.eigenvalues(0) == doctest::Approx(model.eigenvalues(1)).epsilon(1e-10));
}

TEST_CASE("pca_fit: random 8x5 instance against the small-matrix oracle") {
  const Matrix data = random_matrix(8, 5, 42);
  const PcaModel model = pca_fit(data, 5);

  // Full basis reproduces the centered data.
  const Matrix projected = pca_project(model, data);
  const Matrix rebuilt = pca_reconstruct(model, projected);
  CHECK((rebuilt - data).cwiseAbs().maxCoeff() < 1e-8);

  const Matrix centered = data.rowwise() - data.colwise().mean();
  const Matrix covariance = centered.transpose() * centered / 7.0;
  const auto oracle = oracles::charpoly_eigen(covariance);
  for (int i = 0; i < 5; ++i) {
    CHECK(model.eigenvalues(i) ==
          doctest::Approx(oracle[static_cast<std::size_t>(i)].value).epsilon(1e-6));
    CHECK(direction_mismatch(model.components.col(i),
                             oracle[static_cast<std::size_t>(i)].vector) < 1e-6);
  }
}

TEST_CASE("pca_fit: validation and degenerate input") {
  const Matrix data = random_matrix(6, 3, 7);
  CHECK_THROWS_AS(pca_fit(data, 4), ValidationError);
  CHECK_THROWS_AS(pca_fit(data, 0), ValidationError);
  CHECK_THROWS_AS(pca_fit(Matrix::Zero(1, 3), 1), ValidationError);

  Matrix constant = Matrix::Constant(5, 3, 2.5);
  try {
    pca_fit(constant, 1);
    FAIL("expected DegenerateInputError");
  } catch (const DegenerateInputError& e) {
    const std::string what = e.what();
    CHECK(what.find("0") != std::string::npos);
    CHECK(what.find("1") != std::string::npos);
    CHECK(what.find("2") != std::string::npos);
  }
}

TEST_CASE("pca_project: the mean maps to the zero vector") {
  const Matrix data = random_matrix(10, 4, 8);
  const PcaModel model = pca_fit(data, 2);
  Matrix mean_row(1, 4);
  mean_row = data.colwise().mean();
  const Matrix projected = pca_project(model, mean_row);
  CHECK(projected.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pca: sweep oracle - reconstruction error matches discarded eigenvalues") {
  const int n = 12, dim = 6;
  const Matrix data = random_matrix(n, dim, 9);
  std::vector<double> errors;
  for (int d = 1; d <= dim; ++d) {
    const PcaModel model = pca_fit(data, d);
    const Matrix rebuilt = pca_reconstruct(model, pca_project(model, data));
    const double mse_per_row = (rebuilt - data).array().square().sum() / n;
    errors.push_back(mse_per_row);
    // Sum of discarded eigenvalues, rescaled from the N-1 covariance divisor.
    double discarded = 0.0;
    for (int j = d; j < dim; ++j) discarded += model.eigenvalues(j);
    CHECK(mse_per_row ==
          doctest::Approx(discarded * static_cast<double>(n - 1) / n).epsilon(1e-6));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) CHECK(errors[i] <= errors[i - 1] + 1e-12);
}

TEST_CASE("pca: projected training coordinates have eigenvalue variances") {
  const Matrix data = random_matrix(30, 5, 10);
  const PcaModel model = pca_fit(data, 5);
  const Matrix projected = pca_project(model, data);
  for (int c = 0; c < 5; ++c) {
    const double variance =
        (projected.col(c).array() - projected.col(c).mean()).square().sum() / 29.0;
    CHECK(variance == doctest::Approx(model.eigenvalues(c)).epsilon(1e-6));
  }
}

TEST_CASE("lda_fit: two tight 1-D classes separate with consistent sign") {
  Matrix data(8, 1);
  data << -1.02, -0.99, -1.01, -0.98, 0.98, 1.01, 0.99, 1.02;
  std::vector<std::string> labels = {"neg", "neg", "neg", "neg", "pos", "pos", "pos", "pos"};
  const LdaModel model = lda_fit(data, labels, 1);
  const Matrix projected = lda_project(model, data);
  double neg_mean = 0.0, pos_mean = 0.0;
  for (int r = 0; r < 4; ++r) neg_mean += projected(r, 0) / 4.0;
  for (int r = 4; r < 8; ++r) pos_mean += projected(r, 0) / 4.0;
  CHECK(std::abs(pos_mean - neg_mean) > 1.0);
  // All projected members sit on their class-mean side.
  for (int r = 0; r < 4; ++r) CHECK((projected(r, 0) - neg_mean) * (pos_mean - neg_mean) < 1.0);
}

TEST_CASE("lda_fit: equal class means give near-zero eigenvalues") {
  // Both classes contain exactly the same points, so the class means agree
  // and the between-class scatter is identically zero.
  Rng rng(13);
  Matrix points(20, 3);
  for (int r = 0; r < 20; ++r) {
    for (int c = 0; c < 3; ++c) points(r, c) = rng.normal();
  }
  Matrix data(40, 3);
  data.topRows(20) = points;
  data.bottomRows(20) = points;
  std::vector<std::string> labels(20, "a");
  labels.insert(labels.end(), 20, "b");
  const LdaModel model = lda_fit(data, labels, 1);
  CHECK(model.eigenvalues(0) < 1e-6);
}

TEST_CASE("lda_fit: 3-class 2-D instance against a generalized-eigen oracle") {
  Rng rng(14);
  Matrix data(60, 2);
  std::vector<std::string> labels;
  const double centers[3][2] = {{4.0, 0.0}, {-2.0, 3.0}, {-2.0, -3.0}};
  for (int r = 0; r < 60; ++r) {
    const int c = r % 3;
    data(r, 0) = centers[c][0] + 0.8 * rng.normal();
    data(r, 1) = centers[c][1] + 0.4 * rng.normal();
    labels.push_back("c" + std::to_string(c));
  }
  const LdaModel model = lda_fit(data, labels, 2);

  // Oracle: build the scatter matrices per definition, add the documented
  // ridge, and solve det(Sb - lambda Sw) = 0 with the 2x2 quadratic formula.
  const Vector mean = data.colwise().mean();
  Matrix sw = Matrix::Zero(2, 2), sb = Matrix::Zero(2, 2);
  for (int c = 0; c < 3; ++c) {
    Vector class_mean = Vector::Zero(2);
    int count = 0;
    for (int r = 0; r < 60; ++r) {
      if (r % 3 == c) {
        class_mean += data.row(r).transpose();
        ++count;
      }
    }
    class_mean /= count;
    for (int r = 0; r < 60; ++r) {
      if (r % 3 == c) {
        const Vector diff = data.row(r).transpose() - class_mean;
        sw += diff * diff.transpose();
      }
    }
    const Vector offset = class_mean - mean;
    sb += count * offset * offset.transpose();
  }
  sw += (1e-6 * sw.trace() / 2.0) * Matrix::Identity(2, 2);

  // det(Sb - lambda Sw) = 0 expands to a quadratic in lambda.
  const double a = sw(0, 0) * sw(1, 1) - sw(0, 1) * sw(1, 0);
  const double b = -(sb(0, 0) * sw(1, 1) + sb(1, 1) * sw(0, 0) - sb(0, 1) * sw(1, 0) -
                     sb(1, 0) * sw(0, 1));
  const double c_term = sb(0, 0) * sb(1, 1) - sb(0, 1) * sb(1, 0);
  const double disc = std::sqrt(b * b - 4.0 * a * c_term);
  const double lambda0 = (-b + disc) / (2.0 * a);
  const double lambda1 = (-b - disc) / (2.0 * a);

  CHECK(model.eigenvalues(0) == doctest::Approx(std::max(lambda0, lambda1)).epsilon(1e-6));
  CHECK(model.eigenvalues(1) == doctest::Approx(std::min(lambda0, lambda1)).epsilon(1e-6));

  for (int i = 0; i < 2; ++i) {
    const double lambda = model.eigenvalues(i);
    const Matrix m = sb - lambda * sw;
    // Nullspace direction of a rank-1 2x2 matrix.
    Vector direction(2);
    if (std::abs(m(0, 0)) + std::abs(m(0, 1)) > std::abs(m(1, 0)) + std::abs(m(1, 1))) {
      direction << -m(0, 1), m(0, 0);
    } else {
      direction << -m(1, 1), m(1, 0);
    }
    CHECK(direction_mismatch(model.projection.col(i), direction) < 1e-6);
  }

  // Projection is the mean-centered linear map.
  const Matrix projected = lda_project(model, data);
  const Matrix expected = (data.rowwise() - mean.transpose()) * model.projection;
  CHECK((projected - expected).cwiseAbs().maxCoeff() == 0.0);
  Matrix mean_row(1, 2);
  mean_row = mean.transpose();
  CHECK(lda_project(model, mean_row).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lda_fit: dimension and class-size validation") {
  Rng rng(15);
  Matrix data(12, 3);
  std::vector<std::string> labels;
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < 3; ++c) data(r, c) = rng.normal();
    labels.push_back(r % 3 == 0 ? "a" : (r % 3 == 1 ? "b" : "c"));
  }
  CHECK_THROWS_AS(lda_fit(data, labels, 3), ValidationError);  // d > C-1
  CHECK_NOTHROW(lda_fit(data, labels, 2));

  std::vector<std::string> lonely = labels;
  for (auto& label : lonely) {
    if (label == "c") label = "a";
  }
  lonely[2] = "c";  // a single row for class c
  CHECK_THROWS_AS(lda_fit(data, lonely, 1), ValidationError);
}

TEST_CASE("vanilla_ae_fit: reconstruction improves at least 5x on blobs") {
  BlobSpec spec;
  spec.num_classes = 4;
  spec.dim = 10;
  spec.per_class = 150;
  spec.separation = 10.0;
  spec.seed = 51;
  const Dataset data = synth_blobs(spec);
  const Standardizer standardizer = standardize_fit(data.features);
  const Matrix features = standardize_apply(standardizer, data.features);

  AaeConfig config;
  config.input_dim = spec.dim;
  config.code_dim = 3;
  config.hidden_width = 32;
  config.hidden_depth = 2;
  config.dropout_rate = 0.1;
  config.batch_size = 64;
  config.epochs = 100;
  config.reconstruction_opt = nn::OptimizerSettings::adam(1e-3);
  config.seed = 52;
  const VanillaAeModel model = vanilla_ae_fit(features, config);
  REQUIRE(model.history.size() == 100);
  CHECK(model.history.back().recon_mse * 5.0 < model.history.front().recon_mse);

  const Matrix codes = vanilla_ae_encode(model, features);
  CHECK(codes.cols() == 3);
  CHECK(codes.rows() == features.rows());
}

TEST_CASE("vanilla_ae_fit: zero learning rate is a fixed point") {
  BlobSpec spec;
  spec.num_classes = 2;
  spec.dim = 5;
  spec.per_class = 40;
  spec.seed = 53;
  const Dataset data = synth_blobs(spec);

  AaeConfig config;
  config.input_dim = spec.dim;
  config.code_dim = 2;
  config.hidden_width = 8;
  config.hidden_depth = 1;
  config.dropout_rate = 0.0;
  config.batch_size = 16;
  config.epochs = 3;
  config.reconstruction_opt = nn::OptimizerSettings::sgd(0.0);
  config.seed = 54;
  const VanillaAeModel trained = vanilla_ae_fit(data.features, config);

  Rng ref_rng(derive_seed(54, "init/encoder"));
  const nn::Network reference = nn::Network::make_mlp(5, {8}, 2, nn::Activation::Relu,
                                                      nn::Activation::Identity, 0.0, ref_rng);
  for (std::size_t i = 0; i < reference.num_layers(); ++i) {
    CHECK((trained.encoder.layers()[i].dense.weights - reference.layers()[i].dense.weights)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("vanilla_ae_fit: identical to the adversarial loop with zero adversarial rates") {
  BlobSpec spec;
  spec.num_classes = 4;
  spec.dim = 8;
  spec.per_class = 50;
  spec.seed = 55;
  const Dataset data = synth_blobs(spec);
  const Standardizer standardizer = standardize_fit(data.features);
  Dataset std_data = data;
  std_data.features = standardize_apply(standardizer, data.features);

  AaeConfig config;
  config.input_dim = spec.dim;
  config.code_dim = 2;
  config.hidden_width = 16;
  config.hidden_depth = 2;
  config.dropout_rate = 0.5;
  config.batch_size = 32;
  config.epochs = 5;
  config.reconstruction_opt = nn::OptimizerSettings::adam(1e-3);
  config.seed = 56;

  const VanillaAeModel vanilla = vanilla_ae_fit(std_data.features, config);

  AaeConfig adversarial_config = config;
  adversarial_config.discriminator_opt = nn::OptimizerSettings::adam(0.0);
  adversarial_config.generator_opt = nn::OptimizerSettings::adam(0.0);
  const auto class_labels = std_data.class_set();
  const MixturePrior prior =
      MixturePrior::default_layout(class_labels, config.code_dim, 4.0, 0.5);
  AaeModel model = build(adversarial_config, class_labels, prior);
  AaeTrainer trainer(model);
  for (int epoch = 0; epoch < config.epochs; ++epoch) trainer.train_epoch(std_data);

  for (std::size_t i = 0; i < model.encoder.num_layers(); ++i) {
    CHECK((model.encoder.layers()[i].dense.weights - vanilla.encoder.layers()[i].dense.weights)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK((model.decoder.layers()[i].dense.weights - vanilla.decoder.layers()[i].dense.weights)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}
