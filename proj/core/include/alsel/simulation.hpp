#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "alsel/strategies.hpp"
#include "alsel/types.hpp"

// Desk-scale active-learning simulation: synthetic Gaussian-mixture data, a
// linear softmax learner, feature-noise augmentations, and the multi-cycle
// query/label/retrain loop. Features double as the learner's penultimate
// activations and as the self-supervised embeddings for initial selection.

namespace alsel {

struct LearnerConfig {
  std::size_t epochs = 300;
  double learning_rate = 0.5;
  double l2_penalty = 1e-4;
};

enum class InitialSelection { Random, InitialDiversity };

InitialSelection initial_selection_from_name(std::string_view name);
std::string_view to_string(InitialSelection mode);

struct SimConfig {
  std::size_t n_samples = 2000;
  std::size_t dim = 8;
  std::size_t n_classes = 8;
  double cluster_spread = 0.30;
  double label_noise = 0.0;
  std::size_t initial_budget = 40;
  std::vector<std::size_t> cycle_budgets = {40, 40, 40};
  std::size_t n_augmentations = 8;
  double augmentation_noise = 0.20;
  std::vector<Strategy> strategies = {Strategy::Random, Strategy::ConsistencyEmbedding};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  LearnerConfig learner;
  InitialSelection initial_selection = InitialSelection::Random;
  Temperature temperature = Temperature::finite(0.5);
  bool consistency_seed_with_labeled = true;
};

/// Throws ValidationError when budgets exceed the train pool, K < 2, or a
/// field is out of range.
void validate(const SimConfig& config);

/// Fraction of samples forming the train pool; the remainder is the held-out
/// test split that is never queried.
inline constexpr double kTrainFraction = 0.9;

struct SimDataset {
  EmbeddingMatrix features;       // all n_samples rows
  std::vector<int> labels;        // the labels an annotator would give
  std::vector<int> clean_labels;  // pre-noise cluster memberships
  EmbeddingMatrix class_centers;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

/// Balanced Gaussian clusters with random unit-sphere centers, an exact
/// round(label_noise * N) count of uniformly flipped labels, and a 90/10
/// train/test split. Byte-identical output for identical (config, seed).
SimDataset generate_mixture(const SimConfig& config, std::uint64_t seed);

/// Multinomial logistic regression parameters (weights C x d row-major).
struct Learner {
  std::size_t dim = 0;
  std::size_t n_classes = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};

/// Full-batch gradient descent from zero initialization on mean
/// cross-entropy with an L2 penalty on the weights (bias unpenalized).
/// Deterministic; throws on an empty training set.
Learner train_learner(const EmbeddingMatrix& features, std::span<const int> labels,
                      std::size_t n_classes, const LearnerConfig& config);

/// Softmax class probabilities for one feature row.
std::vector<double> predict_probabilities(const Learner& learner, std::span<const float> x);

/// Argmax class (ties to the smallest class index).
int predict_class(const Learner& learner, std::span<const float> x);

/// Mean cross-entropy plus 0.5 * l2 * ||W||^2; the objective train_learner
/// descends.
double learner_loss(const Learner& learner, const EmbeddingMatrix& features,
                    std::span<const int> labels, double l2_penalty);

/// Analytic gradient of learner_loss. grad_weights has weights' layout,
/// grad_bias has bias's.
void learner_gradient(const Learner& learner, const EmbeddingMatrix& features,
                      std::span<const int> labels, double l2_penalty,
                      std::span<double> grad_weights, std::span<double> grad_bias);

/// Model outputs on K noisy copies of every feature row: entry (i, k, .) is
/// the softmax at features[i] + noise * N(0, I).
PredictionTensor simulate_predictions(const Learner& learner, const EmbeddingMatrix& features,
                                      std::size_t n_augmentations, double augmentation_noise,
                                      std::uint64_t seed);

struct CycleRecord {
  std::size_t cycle = 0;  // 0 = initial model, then one per query cycle
  std::size_t labeled_count = 0;
  double test_accuracy = 0.0;
  double covering_radius = 0.0;         // max distance to the labeled set, train pool
  double mean_covering_distance = 0.0;  // mean distance to the labeled set
  std::vector<std::size_t> selected;    // dataset row indices added this cycle
};

struct RunRecord {
  Strategy strategy = Strategy::Random;
  std::uint64_t seed = 0;
  int degenerate_draws = 0;
  std::vector<CycleRecord> cycles;
};

struct AggregateRecord {
  Strategy strategy = Strategy::Random;
  std::size_t cycle = 0;
  std::size_t labeled_count = 0;
  double mean_accuracy = 0.0;
  double stderr_accuracy = 0.0;
  double mean_covering_radius = 0.0;
  double stderr_covering_radius = 0.0;
};

struct ALExperimentReport {
  SimConfig config;
  std::vector<RunRecord> runs;
  std::vector<AggregateRecord> aggregates;
};

/// Runs every (strategy, seed) pair: initial selection, initial training,
/// then query -> label -> retrain per cycle. Within one seed all strategies
/// share the dataset and the initial labeled set, so comparisons are paired.
ALExperimentReport run_experiment(const SimConfig& config);

/// Accuracy of the learner on the dataset's test split.
double test_accuracy(const Learner& learner, const SimDataset& dataset);

}  // namespace alsel
