#include <doctest.h>

#include "aae/dataset.hpp"
#include "oracles.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

using namespace aae;

namespace {

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "aae_dataset_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("load_csv: basic parse preserves names and order") {
  const auto path = temp_path("basic.csv");
  write_file(path,
             "f_a,f_b,label,session,speaker\n"
             "1.0,2.0,happy,s1,spk1\n"
             "3.5,-4.0,sad,s1,spk1\n"
             "0.25,0.5,happy,s2,spk2\n");
  const Dataset data = load_csv(path, "label");
  CHECK(data.num_rows() == 3);
  CHECK(data.num_features() == 2);
  CHECK(data.feature_names == std::vector<std::string>{"f_a", "f_b"});
  CHECK(data.features(1, 1) == doctest::Approx(-4.0));
  CHECK(data.labels[2] == "happy");
  CHECK(data.session_ids[2] == "s2");
  CHECK(data.speaker_ids[0] == "spk1");
}

TEST_CASE("load_csv: missing label column is a schema error naming it") {
  const auto path = temp_path("nolabel.csv");
  write_file(path, "f_a,f_b\n1.0,2.0\n");
  try {
    load_csv(path, "label");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("label") != std::string::npos);
  }
}

TEST_CASE("load_csv: non-numeric cell reports row and column") {
  const auto path = temp_path("badcell.csv");
  write_file(path, "f_a,label\n1.0,x\nnope,y\n");
  try {
    load_csv(path, "label");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string what = e.what();
    CHECK(what.find("nope") != std::string::npos);
    CHECK(what.find("row 2") != std::string::npos);
    CHECK(what.find("f_a") != std::string::npos);
  }
}

TEST_CASE("load_csv/save_csv: round trip is bit-exact") {
  BlobSpec spec;
  spec.num_classes = 3;
  spec.dim = 4;
  spec.per_class = 10;
  spec.seed = 11;
  const Dataset original = synth_blobs(spec);
  const auto path = temp_path("roundtrip.csv");
  save_csv(original, path);
  const Dataset loaded = load_csv(path, "label");
  REQUIRE(loaded.num_rows() == original.num_rows());
  REQUIRE(loaded.num_features() == original.num_features());
  CHECK((loaded.features - original.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK(loaded.labels == original.labels);
  CHECK(loaded.session_ids == original.session_ids);
  CHECK(loaded.speaker_ids == original.speaker_ids);
  CHECK(loaded.feature_names == original.feature_names);
}

TEST_CASE("load_csv: missing file is an IO error") {
  CHECK_THROWS_AS(load_csv("/nonexistent/nowhere.csv", "label"), IoError);
}

TEST_CASE("load_arff: minimal file with numeric, nominal and string attributes") {
  const auto path = temp_path("minimal.arff");
  write_file(path,
             "% openSMILE-style output\n"
             "@relation emotion\n"
             "@attribute name string\n"
             "@attribute pcm_loudness numeric\n"
             "@attribute mfcc_1 real\n"
             "@attribute class {angry,happy}\n"
             "@data\n"
             "Ses01F_impro01_F000,0.5,1.25,angry\n"
             "Ses02M_script01_M013,-0.75,2.0,happy\n");
  const Dataset data = load_arff(path);
  CHECK(data.num_rows() == 2);
  CHECK(data.num_features() == 2);
  CHECK(data.feature_names == std::vector<std::string>{"pcm_loudness", "mfcc_1"});
  CHECK(data.labels == std::vector<std::string>{"angry", "happy"});
  CHECK(data.session_ids == std::vector<std::string>{"Ses01", "Ses02"});
  CHECK(data.speaker_ids == std::vector<std::string>{"Ses01_F", "Ses02_M"});
}

TEST_CASE("load_arff: nominal value outside the declared set") {
  const auto path = temp_path("badnominal.arff");
  write_file(path,
             "@relation r\n"
             "@attribute x numeric\n"
             "@attribute class {a,b}\n"
             "@data\n"
             "1.0,c\n");
  CHECK_THROWS_AS(load_arff(path), ParseError);
}

TEST_CASE("load_arff: malformed sections carry a line number") {
  const auto path = temp_path("malformed.arff");
  write_file(path,
             "@relation r\n"
             "@attribute x numeric\n"
             "bogus line\n"
             "@data\n"
             "1.0\n");
  try {
    load_arff(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("load_arff: 1582 numeric attributes give D = 1582") {
  const auto path = temp_path("wide.arff");
  std::ofstream out(path);
  out << "@relation opensmile\n@attribute name string\n";
  for (int i = 0; i < 1582; ++i) out << "@attribute feat" << i << " numeric\n";
  out << "@attribute class {neutral,angry,sad,happy}\n@data\n";
  for (int r = 0; r < 3; ++r) {
    out << "Ses0" << r + 1 << "F_impro01_F00" << r;
    for (int i = 0; i < 1582; ++i) out << "," << (0.001 * i + r);
    out << ",angry\n";
  }
  out.close();
  const Dataset data = load_arff(path);
  CHECK(data.num_features() == 1582);
  CHECK(data.num_rows() == 3);
  CHECK(data.session_ids[2] == "Ses03");
}

TEST_CASE("standardize: fit data maps to zero mean, unit variance") {
  BlobSpec spec;
  spec.num_classes = 2;
  spec.dim = 5;
  spec.per_class = 50;
  spec.seed = 3;
  const Dataset data = synth_blobs(spec);
  const Standardizer s = standardize_fit(data.features);
  const Matrix standardized = standardize_apply(s, data.features);
  for (int c = 0; c < spec.dim; ++c) {
    CHECK(std::abs(standardized.col(c).mean()) < 1e-10);
    const double variance =
        (standardized.col(c).array() - standardized.col(c).mean()).square().sum() /
        (data.num_rows() - 1);
    CHECK(std::abs(std::sqrt(variance) - 1.0) < 1e-10);
  }
  // Inversion restores the original values.
  const Matrix restored = standardize_invert(s, standardized);
  CHECK((restored - data.features).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("standardize: constant features are flagged and map to zero") {
  Matrix features(4, 2);
  features << 1.0, 7.0, 2.0, 7.0, 3.0, 7.0, 4.0, 7.0;
  const Standardizer s = standardize_fit(features);
  REQUIRE(s.constant_features == std::vector<int>{1});
  CHECK(s.stddev(1) == 1.0);
  const Matrix standardized = standardize_apply(s, features);
  for (int r = 0; r < 4; ++r) CHECK(standardized(r, 1) == 0.0);
}

TEST_CASE("standardize: applying twice differs from applying once on shifted data") {
  Matrix features(3, 1);
  features << 10.0, 12.0, 14.0;
  const Standardizer s = standardize_fit(features);
  const Matrix once = standardize_apply(s, features);
  const Matrix twice = standardize_apply(s, once);
  CHECK((once - twice).cwiseAbs().maxCoeff() > 1.0);
}

TEST_CASE("standardize: the fit never reads held-out rows") {
  BlobSpec spec;
  spec.num_classes = 2;
  spec.dim = 3;
  spec.per_class = 40;
  spec.seed = 21;
  const Dataset data = synth_blobs(spec);
  const auto plan = make_session_folds(data);
  const auto& fold = plan.folds[0];
  const Dataset train = data.subset(data.rows_not_in_sessions(fold.test_sessions));

  // Shift the held-out rows; the train-only fit must not move.
  Dataset shifted = data;
  for (int r : shifted.rows_in_sessions(fold.test_sessions)) {
    shifted.features.row(r).array() += 100.0;
  }
  const Dataset shifted_train = shifted.subset(shifted.rows_not_in_sessions(fold.test_sessions));
  const Standardizer a = standardize_fit(train.features);
  const Standardizer b = standardize_fit(shifted_train.features);
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() == 0.0);

  // Fitting on train+test does move, which is what the per-fold split avoids.
  const Standardizer contaminated = standardize_fit(shifted.features);
  CHECK((a.mean - contaminated.mean).cwiseAbs().maxCoeff() > 1.0);
}

TEST_CASE("make_session_folds: one fold per session, exact partition") {
  BlobSpec spec;
  spec.num_classes = 2;
  spec.dim = 2;
  spec.per_class = 25;
  spec.num_sessions = 5;
  spec.seed = 1;
  const Dataset data = synth_blobs(spec);
  const FoldPlan plan = make_session_folds(data);
  REQUIRE(plan.folds.size() == 5);

  const auto all_sessions = data.session_set();
  std::set<std::string> seen_test;
  for (const auto& fold : plan.folds) {
    REQUIRE(fold.test_sessions.size() == 1);
    // Disjoint and jointly exhaustive.
    for (const auto& s : fold.test_sessions) {
      CHECK(fold.train_sessions.count(s) == 0);
      CHECK(seen_test.insert(s).second);
    }
    std::set<std::string> unioned = fold.train_sessions;
    unioned.insert(fold.test_sessions.begin(), fold.test_sessions.end());
    CHECK(unioned == std::set<std::string>(all_sessions.begin(), all_sessions.end()));
  }
  CHECK(seen_test == std::set<std::string>(all_sessions.begin(), all_sessions.end()));
}

TEST_CASE("make_session_folds: two sessions give two folds") {
  BlobSpec spec;
  spec.num_classes = 2;
  spec.dim = 2;
  spec.per_class = 10;
  spec.num_sessions = 2;
  spec.seed = 2;
  const FoldPlan plan = make_session_folds(synth_blobs(spec));
  CHECK(plan.folds.size() == 2);
}

TEST_CASE("make_session_folds: speakers never straddle train and test") {
  BlobSpec spec;
  spec.num_classes = 3;
  spec.dim = 2;
  spec.per_class = 30;
  spec.seed = 5;
  const Dataset data = synth_blobs(spec);
  const FoldPlan plan = make_session_folds(data);
  for (const auto& fold : plan.folds) {
    std::set<std::string> train_speakers, test_speakers;
    for (int r : data.rows_not_in_sessions(fold.test_sessions)) {
      train_speakers.insert(data.speaker_ids[static_cast<std::size_t>(r)]);
    }
    for (int r : data.rows_in_sessions(fold.test_sessions)) {
      test_speakers.insert(data.speaker_ids[static_cast<std::size_t>(r)]);
    }
    for (const auto& speaker : test_speakers) CHECK(train_speakers.count(speaker) == 0);
  }
}

TEST_CASE("make_session_folds: single session is rejected") {
  BlobSpec spec;
  spec.num_classes = 2;
  spec.dim = 2;
  spec.per_class = 10;
  spec.num_sessions = 1;
  spec.seed = 2;
  CHECK_THROWS_AS(make_session_folds(synth_blobs(spec)), ValidationError);
}

TEST_CASE("synth_blobs: zero separation leaves class means indistinguishable") {
  BlobSpec spec;
  spec.num_classes = 2;
  spec.dim = 6;
  spec.per_class = 400;
  spec.separation = 0.0;
  spec.noise_stddev = 1.0;
  spec.seed = 31;
  const Dataset data = synth_blobs(spec);
  std::vector<int> rows_a, rows_b;
  for (int r = 0; r < data.num_rows(); ++r) {
    (data.labels[static_cast<std::size_t>(r)] == "c0" ? rows_a : rows_b).push_back(r);
  }
  const Dataset a = data.subset(rows_a);
  const Dataset b = data.subset(rows_b);
  for (int c = 0; c < spec.dim; ++c) {
    const double mean_diff = a.features.col(c).mean() - b.features.col(c).mean();
    // Standard error of the difference of two means of 400 unit-variance rows.
    const double se = std::sqrt(2.0 / 400.0);
    CHECK(std::abs(mean_diff) < 3.0 * se * 1.5);
  }
}

TEST_CASE("synth_blobs: high separation is nearest-centroid separable") {
  BlobSpec spec;
  spec.num_classes = 4;
  spec.dim = 10;
  spec.per_class = 100;
  spec.separation = 10.0;
  spec.noise_stddev = 1.0;
  spec.seed = 32;
  const Dataset data = synth_blobs(spec);
  const auto predictions =
      oracles::nearest_centroid_predict(data.features, data.labels, data.features);
  int correct = 0;
  for (int r = 0; r < data.num_rows(); ++r) {
    if (predictions[static_cast<std::size_t>(r)] == data.labels[static_cast<std::size_t>(r)]) {
      ++correct;
    }
  }
  CHECK(static_cast<double>(correct) / data.num_rows() > 0.95);
}

TEST_CASE("synth_blobs: deterministic under the same seed") {
  BlobSpec spec;
  spec.seed = 7;
  spec.per_class = 20;
  const Dataset a = synth_blobs(spec);
  const Dataset b = synth_blobs(spec);
  CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.labels == b.labels);
  CHECK(a.session_ids == b.session_ids);
}

TEST_CASE("dataset subset and fold plan save") {
  BlobSpec spec;
  spec.num_classes = 2;
  spec.dim = 2;
  spec.per_class = 10;
  spec.seed = 9;
  const Dataset data = synth_blobs(spec);
  const Dataset sub = data.subset({0, 5, 7});
  CHECK(sub.num_rows() == 3);
  CHECK(sub.labels[1] == data.labels[5]);
  CHECK_THROWS_AS(data.subset({-1}), ValidationError);

  const auto path = temp_path("folds.txt");
  save_fold_plan(make_session_folds(data), path);
  std::ifstream in(path);
  std::string first_line;
  std::getline(in, first_line);
  CHECK(first_line == "fold 0");
}
