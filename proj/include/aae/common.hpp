#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Error hierarchy. The CLI maps these onto exit codes, so new error kinds
// should derive from one of the existing categories.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad arguments, inconsistent dimensions, unknown labels, invalid config.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

class ShapeError : public ValidationError {
 public:
  explicit ShapeError(const std::string& what) : ValidationError(what) {}
};

// API misuse, e.g. a backward pass with a cache from a different network.
class UsageError : public ValidationError {
 public:
  explicit UsageError(const std::string& what) : ValidationError(what) {}
};

// Malformed file content (CSV cells, ARFF sections, config JSON).
class ParseError : public ValidationError {
 public:
  explicit ParseError(const std::string& what) : ValidationError(what) {}
};

// Missing/unreadable/unwritable files.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

// Non-finite losses or runaway reconstruction error during training.
class TrainingDiverged : public Error {
 public:
  explicit TrainingDiverged(const std::string& what) : Error(what) {}
};

uint64_t fnv1a64(const void* data, std::size_t size, uint64_t seed = 0xcbf29ce484222325ULL);
uint64_t fnv1a64(const std::string& text, uint64_t seed = 0xcbf29ce484222325ULL);
uint64_t splitmix64(uint64_t x);

// Derives an independent child seed from a root seed and a stream tag.
// Every component pulls its randomness from a named stream so that adding
// or removing one consumer never perturbs the draws seen by another.
uint64_t derive_seed(uint64_t root, const std::string& tag);

// Deterministic random source. Distributions are implemented on top of the
// raw 64-bit engine output so that the same seed yields the same sequence on
// every platform and standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0);

  uint64_t next_u64();
  // Uniform on [0, 1).
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0, n), n >= 1.
  uint64_t uniform_index(uint64_t n);
  // Standard normal via Box-Muller; the spare value is cached.
  double normal();
  double normal(double mean, double stddev);

  Rng derive(const std::string& tag) const;

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

 private:
  uint64_t state_[4];
  uint64_t root_seed_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::string format_double(double value);  // 17 significant digits, round-trip safe

}  // namespace aae
