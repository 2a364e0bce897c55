#pragma once

#include "aae/common.hpp"

#include <set>
#include <string>
#include <vector>

namespace aae {

// One feature table: per-row label, session id and speaker id alongside the
// numeric features. Immutable by convention once loaded.
struct Dataset {
  Matrix features;  // N x D
  std::vector<std::string> labels;
  std::vector<std::string> session_ids;
  std::vector<std::string> speaker_ids;
  std::vector<std::string> feature_names;  // length D

  int num_rows() const { return static_cast<int>(features.rows()); }
  int num_features() const { return static_cast<int>(features.cols()); }

  void validate() const;
  Dataset subset(const std::vector<int>& rows) const;
  // Sorted distinct labels / session ids.
  std::vector<std::string> class_set() const;
  std::vector<std::string> session_set() const;
  // Row indices whose session id is (not) in the given set, in row order.
  std::vector<int> rows_in_sessions(const std::set<std::string>& sessions) const;
  std::vector<int> rows_not_in_sessions(const std::set<std::string>& sessions) const;

  static Dataset concat(const Dataset& a, const Dataset& b);
};

// CSV with a header row; every column not bound to label/session/speaker is a
// numeric feature. session/speaker column names may be empty, in which case
// all rows share the ids "s0" / "spk0".
Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::string& session_column = "session",
                 const std::string& speaker_column = "speaker", char delimiter = ',');
void save_csv(const Dataset& dataset, const std::string& path, char delimiter = ',');

struct ArffOptions {
  // Regexes applied to the string name attribute; capture group 1 is kept.
  // Defaults match IEMOCAP-style utterance ids such as Ses01F_impro01_F012:
  // session "Ses01", speaker "Ses01_F".
  std::string session_pattern = "^(Ses[0-9]+)";
  std::string speaker_pattern = "_([FM])[0-9]+$";
};

Dataset load_arff(const std::string& path, const ArffOptions& options = {});

struct Standardizer {
  Vector mean;
  Vector stddev;                       // 1.0 for constant features
  std::vector<int> constant_features;  // flagged zero-variance columns
};

Standardizer standardize_fit(const Matrix& train_features);
Matrix standardize_apply(const Standardizer& s, const Matrix& features);
Matrix standardize_invert(const Standardizer& s, const Matrix& standardized);

struct FoldPlan {
  struct Fold {
    std::set<std::string> train_sessions;
    std::set<std::string> test_sessions;
  };
  std::vector<Fold> folds;
};

// One fold per session: that session tests, all others train.
FoldPlan make_session_folds(const Dataset& dataset);
void save_fold_plan(const FoldPlan& plan, const std::string& path);

struct BlobSpec {
  int num_classes = 4;
  int dim = 20;
  int per_class = 500;
  double separation = 10.0;
  double noise_stddev = 1.0;
  int num_sessions = 5;
  uint64_t seed = 0;
};

// Gaussian blobs: class c sits at a random unit direction scaled by
// `separation`; sessions are assigned round-robin so fold logic can run.
Dataset synth_blobs(const BlobSpec& spec);

}  // namespace aae
