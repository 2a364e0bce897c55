#include <doctest.h>

#include "aae/svm.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace aae;
using namespace aae::svm;

namespace {

Matrix separable_points() {
  Matrix x(4, 2);
  x << 1.0, 1.0, 2.0, 1.5, -1.0, -1.0, -2.0, -1.5;
  return x;
}

Vector separable_labels() {
  Vector y(4);
  y << 1.0, 1.0, -1.0, -1.0;
  return y;
}

}  // namespace

TEST_CASE("svm_fit: linearly separable toy reaches 100% training accuracy") {
  const Matrix x = separable_points();
  const Vector y = separable_labels();
  const BinarySvm model = svm_fit(x, y, KernelSpec::linear(), 1.0);
  const Vector decisions = model.decision(x);
  for (int i = 0; i < 4; ++i) CHECK(decisions(i) * y(i) > 0.0);
  CHECK(model.converged);
}

TEST_CASE("svm_fit: XOR with an rbf kernel") {
  Matrix x(4, 2);
  x << 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0, 1.0;
  Vector y(4);
  y << 1.0, 1.0, -1.0, -1.0;
  SmoOptions options;
  options.seed = 3;
  const BinarySvm model = svm_fit(x, y, KernelSpec::rbf(1.0), 10.0, options);
  const Vector decisions = model.decision(x);
  for (int i = 0; i < 4; ++i) CHECK(decisions(i) * y(i) > 0.0);

  // By the 4-fold symmetry all alphas are equal and interior, so the dual
  // optimum is 2/(1 + e^-8 - 2 e^-4), derived by maximizing
  // 4a - 2a^2 (1 + e^-8 - 2 e^-4) by hand.
  const double expected = 2.0 / (1.0 + std::exp(-8.0) - 2.0 * std::exp(-4.0));
  CHECK(model.dual_objective == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("svm_fit: 6-point 1-D dual matches the brute-force lattice oracle") {
  Matrix x(6, 1);
  x << -2.3, -1.1, -0.4, 0.5, 1.2, 2.6;
  Vector y(6);
  y << -1.0, -1.0, -1.0, 1.0, 1.0, 1.0;
  const double box = 0.2;
  SmoOptions options;
  options.tol = 1e-4;
  options.seed = 11;
  const BinarySvm model = svm_fit(x, y, KernelSpec::linear(), box, options);
  const double oracle = oracles::brute_force_svm_dual(x, y, KernelSpec::linear(), box, 0.01);
  CHECK(std::abs(model.dual_objective - oracle) < 1e-3);
}

TEST_CASE("svm_fit: input validation") {
  const Matrix x = separable_points();
  Vector y = separable_labels();
  CHECK_THROWS_AS(svm_fit(x, Vector::Ones(4), KernelSpec::linear(), 1.0), ValidationError);
  CHECK_THROWS_AS(svm_fit(x, y, KernelSpec::linear(), 0.0), ValidationError);
  Vector bad = y;
  bad(0) = 0.5;
  CHECK_THROWS_AS(svm_fit(x, bad, KernelSpec::linear(), 1.0), ValidationError);
  CHECK_THROWS_AS(KernelSpec::rbf(0.0), ValidationError);
  CHECK_THROWS_AS(KernelSpec::parse("poly:3"), ValidationError);
  CHECK(KernelSpec::parse("rbf:0.25").gamma == doctest::Approx(0.25));
}

TEST_CASE("svm_fit: KKT conditions and the dual constraint hold") {
  Rng rng(21);
  const int n = 40;
  Matrix x(n, 3);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    const double sign = i % 2 == 0 ? 1.0 : -1.0;
    for (int c = 0; c < 3; ++c) x(i, c) = sign * 1.2 + 0.9 * rng.normal();
    y(i) = sign;
  }
  SmoOptions options;
  options.seed = 22;
  const double box = 1.0;
  const BinarySvm model = svm_fit(x, y, KernelSpec::rbf(0.3), box, options);

  double balance = 0.0;
  for (int i = 0; i < n; ++i) balance += model.training_alphas(i) * y(i);
  CHECK(std::abs(balance) < 1e-8);

  const Vector decisions = model.decision(x);
  const double slack = 2.0 * options.tol;
  for (int i = 0; i < n; ++i) {
    const double margin = y(i) * decisions(i);
    const double alpha = model.training_alphas(i);
    CHECK(alpha >= 0.0);
    CHECK(alpha <= box);
    if (alpha < 1e-12) {
      CHECK(margin >= 1.0 - slack);
    } else if (alpha > box - 1e-12) {
      CHECK(margin <= 1.0 + slack);
    } else {
      CHECK(std::abs(margin - 1.0) <= slack);
    }
  }
}

TEST_CASE("svm: linear-kernel scaling invariance of predictions") {
  Rng rng(31);
  const int n = 30;
  Matrix x(n, 2);
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) {
    const int c = i % 3;
    x(i, 0) = (c == 0 ? 2.0 : c == 1 ? -2.0 : 0.0) + 0.5 * rng.normal();
    x(i, 1) = (c == 2 ? 2.5 : -1.0) + 0.5 * rng.normal();
    labels.push_back("c" + std::to_string(c));
  }
  const double scale = 3.0;
  SmoOptions options;
  options.seed = 32;
  const MulticlassSvm base = svm_fit_multiclass(x, labels, KernelSpec::linear(), 1.0, options);
  const MulticlassSvm scaled = svm_fit_multiclass(Matrix(x * scale), labels,
                                                  KernelSpec::linear(), 1.0 / (scale * scale),
                                                  options);
  CHECK(svm_predict(base, x) == svm_predict(scaled, Matrix(x * scale)));
}

TEST_CASE("svm_predict: separable multiclass recovers training labels") {
  Rng rng(41);
  const int per_class = 15;
  Matrix x(3 * per_class, 2);
  std::vector<std::string> labels;
  const double centers[3][2] = {{0.0, 3.0}, {-3.0, -2.0}, {3.0, -2.0}};
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_class; ++i) {
      const int row = c * per_class + i;
      x(row, 0) = centers[c][0] + 0.3 * rng.normal();
      x(row, 1) = centers[c][1] + 0.3 * rng.normal();
      labels.push_back("c" + std::to_string(c));
    }
  }
  SmoOptions options;
  options.seed = 42;
  const MulticlassSvm model = svm_fit_multiclass(x, labels, KernelSpec::linear(), 10.0, options);
  CHECK(static_cast<int>(model.machines.size()) == 3);
  CHECK(svm_predict(model, x) == labels);
}

TEST_CASE("svm_predict: two classes reduce to the single binary decision") {
  const Matrix x = separable_points();
  const std::vector<std::string> labels = {"pos", "pos", "neg", "neg"};
  SmoOptions options;
  options.seed = 5;
  const MulticlassSvm model = svm_fit_multiclass(x, labels, KernelSpec::linear(), 1.0, options);
  REQUIRE(model.machines.size() == 1);
  const auto predictions = svm_predict(model, x);
  const Vector decisions = model.machines[0].svm.decision(x);
  for (int i = 0; i < 4; ++i) {
    const std::string expected =
        decisions(i) >= 0.0 ? model.label_order[0] : model.label_order[1];
    CHECK(predictions[static_cast<std::size_t>(i)] == expected);
  }
}

TEST_CASE("svm_predict: a three-way vote tie goes to the largest summed magnitude") {
  // Machines with empty support-vector sets decide purely by bias, which
  // makes the decision values exact and the vote cycle explicit:
  // ab -> a (|0.5|), ac -> c (|0.8|), bc -> b (|0.3|). One vote each, so the
  // summed magnitudes pick c.
  auto constant_machine = [](int first, int second, double bias) {
    MulticlassSvm::PairMachine machine;
    machine.first = first;
    machine.second = second;
    machine.svm.support_vectors = Matrix(0, 2);
    machine.svm.alphas = Vector(0);
    machine.svm.sv_labels = Vector(0);
    machine.svm.bias = bias;
    machine.svm.kernel = KernelSpec::linear();
    return machine;
  };
  MulticlassSvm model;
  model.label_order = {"a", "b", "c"};
  model.machines.push_back(constant_machine(0, 1, 0.5));   // a beats b
  model.machines.push_back(constant_machine(0, 2, -0.8));  // c beats a
  model.machines.push_back(constant_machine(1, 2, 0.3));   // b beats c
  Matrix probe = Matrix::Zero(1, 2);

  // Hand enumeration: votes a=1, b=1, c=1; magnitudes a=0.5, b=0.3, c=0.8.
  const auto prediction = svm_predict(model, probe);
  CHECK(prediction[0] == "c");
  CHECK(svm_predict(model, probe) == prediction);  // deterministic tie handling

  // Equal magnitudes fall back to label order.
  model.machines[1].svm.bias = -0.3;  // now a=0.5, b=0.3, c=0.3 -> a wins outright
  CHECK(svm_predict(model, probe)[0] == "a");
  model.machines[0].svm.bias = 0.3;  // a=0.3, b=0.3, c=0.3 -> earliest label
  CHECK(svm_predict(model, probe)[0] == "a");
}

TEST_CASE("confusion: examples and the naive counting oracle") {
  const std::vector<std::string> order = {"a", "b", "c"};
  SUBCASE("perfect predictions give a diagonal matrix") {
    const std::vector<std::string> truth = {"a", "b", "c", "b", "a"};
    const auto cm = confusion(truth, truth, order);
    CHECK(cm.counts(0, 0) == 2);
    CHECK(cm.counts(1, 1) == 2);
    CHECK(cm.counts(2, 2) == 1);
    CHECK(cm.counts.sum() == 5);
    CHECK(uar(cm) == doctest::Approx(1.0));
  }
  SUBCASE("constant predictor fills one column") {
    const std::vector<std::string> truth = {"a", "b", "c", "b"};
    const std::vector<std::string> predicted(4, "a");
    const auto cm = confusion(truth, predicted, order);
    for (int r = 0; r < 3; ++r) {
      CHECK(cm.counts(r, 0) > 0);
      CHECK(cm.counts(r, 1) == 0);
      CHECK(cm.counts(r, 2) == 0);
    }
  }
  SUBCASE("random lists match the double-loop oracle") {
    Rng rng(61);
    std::vector<std::string> truth, predicted;
    for (int i = 0; i < 200; ++i) {
      truth.push_back(order[rng.uniform_index(3)]);
      predicted.push_back(order[rng.uniform_index(3)]);
    }
    const auto cm = confusion(truth, predicted, order);
    const Matrix oracle = oracles::naive_confusion(truth, predicted, order);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) CHECK(cm.counts(r, c) == static_cast<int>(oracle(r, c)));
    }
  }
  SUBCASE("unknown labels are rejected") {
    CHECK_THROWS_AS(confusion({"a"}, {"z"}, order), ValidationError);
    CHECK_THROWS_AS(confusion({"z"}, {"a"}, order), ValidationError);
    CHECK_THROWS_AS(confusion({"a", "b"}, {"a"}, order), ShapeError);
  }
}

TEST_CASE("uar: examples") {
  SUBCASE("hand-set recalls 0.5 0.7 0.9 0.3 average to 0.6") {
    ConfusionMatrix cm;
    cm.label_order = {"w", "x", "y", "z"};
    cm.counts = Eigen::MatrixXi::Zero(4, 4);
    cm.counts(0, 0) = 5;
    cm.counts(0, 1) = 5;  // recall 0.5
    cm.counts(1, 1) = 7;
    cm.counts(1, 2) = 3;  // recall 0.7
    cm.counts(2, 2) = 9;
    cm.counts(2, 3) = 1;  // recall 0.9
    cm.counts(3, 3) = 3;
    cm.counts(3, 0) = 7;  // recall 0.3
    CHECK(uar(cm) == doctest::Approx(0.6));
  }
  SUBCASE("uniform random predictions over 4 classes approach chance") {
    Rng rng(62);
    const std::vector<std::string> order = {"a", "b", "c", "d"};
    std::vector<std::string> truth, predicted;
    for (int i = 0; i < 40000; ++i) {
      truth.push_back(order[rng.uniform_index(4)]);
      predicted.push_back(order[rng.uniform_index(4)]);
    }
    CHECK(uar(confusion(truth, predicted, order)) == doctest::Approx(0.25).epsilon(0.04));
  }
  SUBCASE("empty class row names the class") {
    ConfusionMatrix cm;
    cm.label_order = {"a", "b"};
    cm.counts = Eigen::MatrixXi::Zero(2, 2);
    cm.counts(0, 0) = 3;
    try {
      uar(cm);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("b") != std::string::npos);
    }
  }
  SUBCASE("invariant under consistent permutation") {
    Rng rng(63);
    ConfusionMatrix cm;
    cm.label_order = {"a", "b", "c"};
    cm.counts = Eigen::MatrixXi::Zero(3, 3);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) cm.counts(r, c) = 1 + static_cast<int>(rng.uniform_index(20));
    }
    const std::vector<int> perm = {2, 0, 1};
    ConfusionMatrix permuted;
    permuted.label_order = {"c", "a", "b"};
    permuted.counts = Eigen::MatrixXi::Zero(3, 3);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) permuted.counts(r, c) = cm.counts(perm[r], perm[c]);
    }
    CHECK(uar(cm) == doctest::Approx(uar(permuted)).epsilon(1e-12));
  }
}

TEST_CASE("two_proportion_test: examples against the erf-series oracle") {
  SUBCASE("identical proportions give p = 1") {
    CHECK(two_proportion_test(30, 100, 30, 100) == doctest::Approx(1.0));
  }
  SUBCASE("90/100 vs 50/100 is overwhelmingly significant") {
    const double p = two_proportion_test(90, 100, 50, 100);
    CHECK(p < 0.001);
    CHECK(p == doctest::Approx(oracles::two_proportion_p_value(90, 100, 50, 100)).epsilon(1e-6));
  }
  SUBCASE("55/100 vs 45/100 gives z ~ 1.414, p ~ 0.157") {
    const double p = two_proportion_test(55, 100, 45, 100);
    CHECK(p == doctest::Approx(0.157299).epsilon(1e-3));
    CHECK(std::abs(p - oracles::two_proportion_p_value(55, 100, 45, 100)) < 1e-6);
  }
  SUBCASE("a spread of cases matches the oracle to 1e-6") {
    const int cases[][4] = {{10, 40, 20, 40}, {1, 10, 9, 10}, {500, 1000, 520, 1000},
                            {0, 5, 5, 5},     {33, 77, 41, 91}};
    for (const auto& c : cases) {
      CHECK(std::abs(two_proportion_test(c[0], c[1], c[2], c[3]) -
                     oracles::two_proportion_p_value(c[0], c[1], c[2], c[3])) < 1e-6);
    }
  }
  SUBCASE("count validation") {
    CHECK_THROWS_AS(two_proportion_test(5, 0, 1, 10), ValidationError);
    CHECK_THROWS_AS(two_proportion_test(11, 10, 1, 10), ValidationError);
    CHECK_THROWS_AS(two_proportion_test(-1, 10, 1, 10), ValidationError);
  }
}
