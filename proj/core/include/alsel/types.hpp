#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "alsel/errors.hpp"

namespace alsel {

/// Dense row-major N x d matrix of single-precision values. One row per
/// sample; rows hold activations, self-supervised features, or consistency
/// embeddings. Immutable after construction.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  /// Takes ownership of `values`, which must hold n_samples * dim entries.
  EmbeddingMatrix(std::size_t n_samples, std::size_t dim, std::vector<float> values);

  std::size_t n_samples() const { return n_samples_; }
  std::size_t dim() const { return dim_; }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  float at(std::size_t i, std::size_t j) const { return values_[i * dim_ + j]; }
  std::span<const float> values() const { return values_; }

 private:
  std::size_t n_samples_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> values_;
};

/// Dense N x K x C tensor of probabilities: model outputs on K augmented
/// copies of each of N samples over C classes. Row-major with the class axis
/// contiguous. Immutable after construction.
class PredictionTensor {
 public:
  PredictionTensor() = default;

  PredictionTensor(std::size_t n_samples, std::size_t n_augmentations,
                   std::size_t n_classes, std::vector<float> values);

  std::size_t n_samples() const { return n_samples_; }
  std::size_t n_augmentations() const { return n_augmentations_; }
  std::size_t n_classes() const { return n_classes_; }

  /// Probability vector over classes for (sample i, augmentation k).
  std::span<const float> row(std::size_t i, std::size_t k) const {
    return {values_.data() + (i * n_augmentations_ + k) * n_classes_, n_classes_};
  }
  float at(std::size_t i, std::size_t k, std::size_t c) const {
    return values_[(i * n_augmentations_ + k) * n_classes_ + c];
  }
  std::span<const float> values() const { return values_; }

 private:
  std::size_t n_samples_ = 0;
  std::size_t n_augmentations_ = 0;
  std::size_t n_classes_ = 0;
  std::vector<float> values_;
};

/// N x C matrix of class-wise prediction variances. Stored in double
/// precision: these values are derived (never file input) and downstream
/// identities are checked at tolerances well below single precision.
class VarianceMatrix {
 public:
  VarianceMatrix() = default;

  VarianceMatrix(std::size_t n_samples, std::size_t n_classes, std::vector<double> values);

  std::size_t n_samples() const { return n_samples_; }
  std::size_t n_classes() const { return n_classes_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * n_classes_, n_classes_};
  }
  double at(std::size_t i, std::size_t c) const { return values_[i * n_classes_ + c]; }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t n_samples_ = 0;
  std::size_t n_classes_ = 0;
  std::vector<double> values_;
};

/// Ordered, duplicate-free set of sample indices. Selection order matters
/// (diversity sampling is order-dependent) and is preserved end to end.
class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(std::vector<std::size_t> indices);

  /// Appends an index; throws ValidationError on duplicates.
  void add(std::size_t index);

  bool contains(std::size_t index) const { return lookup_.count(index) != 0; }
  std::size_t size() const { return order_.size(); }
  bool empty() const { return order_.empty(); }
  std::size_t operator[](std::size_t pos) const { return order_[pos]; }

  std::vector<std::size_t>::const_iterator begin() const { return order_.begin(); }
  std::vector<std::size_t>::const_iterator end() const { return order_.end(); }
  const std::vector<std::size_t>& indices() const { return order_; }

 private:
  std::vector<std::size_t> order_;
  std::unordered_set<std::size_t> lookup_;
};

/// Sampling temperature: either a finite T > 0 (exponent 1/T on distances)
/// or the explicit greedy limit (farthest-point selection). Greedy is its own
/// mode rather than a small numeric T, which would overflow the exponent.
class Temperature {
 public:
  static Temperature greedy() { return Temperature(true, 0.0); }
  static Temperature finite(double value);

  bool is_greedy() const { return greedy_; }
  double value() const { return value_; }

  /// Parses "greedy" or a positive decimal number.
  static Temperature parse(std::string_view text);
  std::string str() const;

 private:
  Temperature(bool greedy, double value) : greedy_(greedy), value_(value) {}
  bool greedy_;
  double value_;
};

enum class Strategy {
  Random,
  MaxEntropy,
  Coreset,
  Badge,
  ConsistencyTopK,
  ConsistencyEmbedding,
  InitialDiversity,
};

Strategy strategy_from_name(std::string_view name);
std::string_view to_string(Strategy strategy);

/// Configuration for one query invocation.
struct StrategyConfig {
  Strategy strategy = Strategy::Random;
  Temperature temperature = Temperature::finite(0.5);
  std::size_t budget = 1;
  std::uint64_t seed = 0;
  // Consistency-embedding only: start the selected set from the labeled
  // rows' embeddings (default) or from scratch restricted to the unlabeled
  // pool (ablation).
  bool seed_with_labeled = true;
};

// --- Validation -----------------------------------------------------------
//
// Each function either returns normally (all invariants hold) or throws a
// ValidationError describing the first violated invariant in a fixed scan
// order, so repeated validation of the same input reports the same issue.

/// Shape positive and every value finite.
void validate(const EmbeddingMatrix& matrix);

/// Shape positive, K >= min_augmentations, every value finite and in [0, 1],
/// every (sample, augmentation) row summing to 1 within `row_sum_tolerance`.
/// Variance needs K >= 2; entropy and gradient embeddings accept K >= 1.
void validate(const PredictionTensor& tensor, std::size_t min_augmentations = 2);

/// Shape positive and every entry finite and nonnegative.
void validate(const VarianceMatrix& matrix);

/// Every index below n_samples (duplicates are impossible by construction).
void validate(const IndexSet& set, std::size_t n_samples);

/// Tolerance for per-row probability sums; absorbs single-precision softmax
/// exports.
inline constexpr double kRowSumTolerance = 1e-4;

/// Copies the given rows of a matrix into a new matrix, in the given order.
EmbeddingMatrix gather_rows(const EmbeddingMatrix& matrix, std::span<const std::size_t> rows);

}  // namespace alsel
