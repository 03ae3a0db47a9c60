#include "alsel/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alsel/rng.hpp"
#include "alsel/sampling.hpp"

namespace alsel {

namespace {

// Seed streams derived from the per-run seed. Dataset generation uses the
// run seed directly; everything else gets an independent stream.
constexpr std::uint64_t kStreamInitial = 1;
std::uint64_t cycle_stream(std::size_t strategy_pos, std::size_t cycle, bool query) {
  return 0x100 + strategy_pos * 256 + cycle * 2 + (query ? 1 : 0);
}

void fisher_yates(std::vector<std::size_t>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = uniform_index(rng, i);
    std::swap(values[i - 1], values[j]);
  }
}

std::vector<double> softmax_logits(std::span<const double> logits) {
  double max_logit = logits[0];
  for (double l : logits) max_logit = std::max(max_logit, l);
  std::vector<double> probs(logits.size());
  double norm = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    probs[c] = std::exp(logits[c] - max_logit);
    norm += probs[c];
  }
  for (double& p : probs) p /= norm;
  return probs;
}

std::vector<double> logits_for(const Learner& learner, std::span<const float> x) {
  std::vector<double> logits(learner.n_classes);
  for (std::size_t c = 0; c < learner.n_classes; ++c) {
    double z = learner.bias[c];
    const double* w = learner.weights.data() + c * learner.dim;
    for (std::size_t j = 0; j < learner.dim; ++j) {
      z += w[j] * static_cast<double>(x[j]);
    }
    logits[c] = z;
  }
  return logits;
}

}  // namespace

InitialSelection initial_selection_from_name(std::string_view name) {
  if (name == "random") return InitialSelection::Random;
  if (name == "initial-diversity") return InitialSelection::InitialDiversity;
  throw ValidationError(ValidationIssue::InvalidArgument,
                        "unknown initial selection mode '" + std::string(name) + "'");
}

std::string_view to_string(InitialSelection mode) {
  return mode == InitialSelection::Random ? "random" : "initial-diversity";
}

void validate(const SimConfig& config) {
  if (config.n_samples < 2 || config.dim == 0 || config.n_classes < 2) {
    throw ValidationError(ValidationIssue::EmptyShape,
                          "simulation needs n_samples >= 2, dim >= 1, n_classes >= 2");
  }
  if (config.n_classes > config.n_samples) {
    throw ValidationError(ValidationIssue::InvalidArgument,
                          "n_classes exceeds n_samples");
  }
  if (!(config.cluster_spread >= 0.0) || !(config.augmentation_noise >= 0.0)) {
    throw ValidationError(ValidationIssue::ValueOutOfRange,
                          "cluster_spread and augmentation_noise must be >= 0");
  }
  if (!(config.label_noise >= 0.0 && config.label_noise <= 1.0)) {
    throw ValidationError(ValidationIssue::ValueOutOfRange,
                          "label_noise must be a probability");
  }
  if (config.n_augmentations < 2) {
    throw ValidationError(ValidationIssue::TooFewAugmentations,
                          "n_augmentations must be >= 2");
  }
  if (config.initial_budget == 0) {
    throw ValidationError(ValidationIssue::InvalidArgument, "initial_budget must be >= 1");
  }
  for (std::size_t b : config.cycle_budgets) {
    if (b == 0) {
      throw ValidationError(ValidationIssue::InvalidArgument, "cycle budgets must be >= 1");
    }
  }
  if (config.strategies.empty() || config.seeds.empty()) {
    throw ValidationError(ValidationIssue::InvalidArgument,
                          "strategies and seeds must be non-empty");
  }
  const auto train_count =
      static_cast<std::size_t>(kTrainFraction * static_cast<double>(config.n_samples));
  std::size_t total = config.initial_budget;
  for (std::size_t b : config.cycle_budgets) total += b;
  if (total > train_count) {
    throw ValidationError(ValidationIssue::BudgetTooLarge,
                          "total budget " + std::to_string(total) + " exceeds train pool of " +
                              std::to_string(train_count));
  }
}

SimDataset generate_mixture(const SimConfig& config, std::uint64_t seed) {
  validate(config);
  const std::size_t n = config.n_samples;
  const std::size_t d = config.dim;
  const std::size_t c_count = config.n_classes;
  Rng rng(seed);

  // Class centers: random directions on the unit sphere.
  std::vector<float> centers(c_count * d);
  for (std::size_t c = 0; c < c_count; ++c) {
    double norm = 0.0;
    std::vector<double> direction(d);
    do {
      norm = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        direction[j] = standard_normal(rng);
        norm += direction[j] * direction[j];
      }
      norm = std::sqrt(norm);
    } while (norm < 1e-12);
    for (std::size_t j = 0; j < d; ++j) {
      centers[c * d + j] = static_cast<float>(direction[j] / norm);
    }
  }

  // Balanced class assignment: counts differ by at most one, order shuffled.
  std::vector<std::size_t> assignment(n);
  for (std::size_t i = 0; i < n; ++i) assignment[i] = i % c_count;
  fisher_yates(assignment, rng);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(assignment[i]);

  std::vector<float> features(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = assignment[i];
    for (std::size_t j = 0; j < d; ++j) {
      features[i * d + j] = static_cast<float>(
          static_cast<double>(centers[c * d + j]) + config.cluster_spread * standard_normal(rng));
    }
  }

  const std::vector<int> clean_labels = labels;

  // Flip an exact count of labels to a uniformly random other class.
  const auto n_flips =
      static_cast<std::size_t>(std::llround(config.label_noise * static_cast<double>(n)));
  if (n_flips > 0) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    fisher_yates(order, rng);
    for (std::size_t f = 0; f < n_flips; ++f) {
      const std::size_t i = order[f];
      const std::size_t r = uniform_index(rng, c_count - 1);
      labels[i] = static_cast<int>(r < static_cast<std::size_t>(labels[i]) ? r : r + 1);
    }
  }

  std::vector<std::size_t> split(n);
  std::iota(split.begin(), split.end(), 0);
  fisher_yates(split, rng);
  const auto train_count = static_cast<std::size_t>(kTrainFraction * static_cast<double>(n));

  SimDataset dataset;
  dataset.features = EmbeddingMatrix(n, d, std::move(features));
  dataset.labels = std::move(labels);
  dataset.clean_labels = clean_labels;
  dataset.class_centers = EmbeddingMatrix(c_count, d, std::move(centers));
  dataset.train_indices.assign(split.begin(), split.begin() + train_count);
  dataset.test_indices.assign(split.begin() + train_count, split.end());
  return dataset;
}

Learner train_learner(const EmbeddingMatrix& features, std::span<const int> labels,
                      std::size_t n_classes, const LearnerConfig& config) {
  if (features.n_samples() == 0) {
    throw ValidationError(ValidationIssue::EmptyShape, "cannot train on an empty labeled set");
  }
  if (labels.size() != features.n_samples()) {
    throw ValidationError(ValidationIssue::ShapeMismatch,
                          "feature rows and labels differ in count");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= n_classes) {
      throw ValidationError(ValidationIssue::ValueOutOfRange,
                            "label out of range at sample " + std::to_string(i),
                            {static_cast<std::int64_t>(i), -1, -1});
    }
  }

  Learner learner;
  learner.dim = features.dim();
  learner.n_classes = n_classes;
  learner.weights.assign(n_classes * features.dim(), 0.0);
  learner.bias.assign(n_classes, 0.0);

  std::vector<double> grad_w(learner.weights.size());
  std::vector<double> grad_b(learner.bias.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    learner_gradient(learner, features, labels, config.l2_penalty, grad_w, grad_b);
    for (std::size_t p = 0; p < learner.weights.size(); ++p) {
      learner.weights[p] -= config.learning_rate * grad_w[p];
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
      learner.bias[c] -= config.learning_rate * grad_b[c];
    }
  }
  return learner;
}

std::vector<double> predict_probabilities(const Learner& learner, std::span<const float> x) {
  return softmax_logits(logits_for(learner, x));
}

int predict_class(const Learner& learner, std::span<const float> x) {
  const std::vector<double> logits = logits_for(learner, x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < logits.size(); ++c) {
    if (logits[c] > logits[best]) best = c;
  }
  return static_cast<int>(best);
}

double learner_loss(const Learner& learner, const EmbeddingMatrix& features,
                    std::span<const int> labels, double l2_penalty) {
  double loss = 0.0;
  for (std::size_t i = 0; i < features.n_samples(); ++i) {
    const std::vector<double> probs = predict_probabilities(learner, features.row(i));
    loss -= std::log(std::max(probs[static_cast<std::size_t>(labels[i])], 1e-300));
  }
  loss /= static_cast<double>(features.n_samples());
  double penalty = 0.0;
  for (double w : learner.weights) penalty += w * w;
  return loss + 0.5 * l2_penalty * penalty;
}

void learner_gradient(const Learner& learner, const EmbeddingMatrix& features,
                      std::span<const int> labels, double l2_penalty,
                      std::span<double> grad_weights, std::span<double> grad_bias) {
  std::fill(grad_weights.begin(), grad_weights.end(), 0.0);
  std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
  const std::size_t n = features.n_samples();
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const float> x = features.row(i);
    const std::vector<double> probs = predict_probabilities(learner, x);
    for (std::size_t c = 0; c < learner.n_classes; ++c) {
      const double coef = probs[c] - (static_cast<std::size_t>(labels[i]) == c ? 1.0 : 0.0);
      grad_bias[c] += coef;
      double* gw = grad_weights.data() + c * learner.dim;
      for (std::size_t j = 0; j < learner.dim; ++j) {
        gw[j] += coef * static_cast<double>(x[j]);
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t p = 0; p < grad_weights.size(); ++p) {
    grad_weights[p] = grad_weights[p] * inv_n + l2_penalty * learner.weights[p];
  }
  for (std::size_t c = 0; c < learner.n_classes; ++c) grad_bias[c] *= inv_n;
}

PredictionTensor simulate_predictions(const Learner& learner, const EmbeddingMatrix& features,
                                      std::size_t n_augmentations, double augmentation_noise,
                                      std::uint64_t seed) {
  if (n_augmentations < 2) {
    throw ValidationError(ValidationIssue::TooFewAugmentations,
                          "simulate_predictions needs K >= 2");
  }
  const std::size_t n = features.n_samples();
  const std::size_t d = features.dim();
  const std::size_t c_count = learner.n_classes;
  Rng rng(seed);

  std::vector<float> values(n * n_augmentations * c_count);
  std::vector<float> perturbed(d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const float> x = features.row(i);
    for (std::size_t k = 0; k < n_augmentations; ++k) {
      for (std::size_t j = 0; j < d; ++j) {
        perturbed[j] = static_cast<float>(static_cast<double>(x[j]) +
                                          augmentation_noise * standard_normal(rng));
      }
      const std::vector<double> probs = predict_probabilities(learner, perturbed);
      float* out = values.data() + (i * n_augmentations + k) * c_count;
      for (std::size_t c = 0; c < c_count; ++c) out[c] = static_cast<float>(probs[c]);
    }
  }
  return PredictionTensor(n, n_augmentations, c_count, std::move(values));
}

double test_accuracy(const Learner& learner, const SimDataset& dataset) {
  std::size_t correct = 0;
  for (std::size_t i : dataset.test_indices) {
    if (predict_class(learner, dataset.features.row(i)) == dataset.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.test_indices.size());
}

namespace {

struct ArmState {
  IndexSet labeled;  // train-pool-relative
  Learner learner;
};

Learner train_on_labeled(const EmbeddingMatrix& pool_features,
                         const std::vector<int>& pool_labels, const IndexSet& labeled,
                         const SimConfig& config) {
  const EmbeddingMatrix x = gather_rows(pool_features, labeled.indices());
  std::vector<int> y(labeled.size());
  for (std::size_t pos = 0; pos < labeled.size(); ++pos) y[pos] = pool_labels[labeled[pos]];
  return train_learner(x, y, config.n_classes, config.learner);
}

CycleRecord make_record(std::size_t cycle, const ArmState& arm,
                        const EmbeddingMatrix& pool_features, const SimDataset& dataset,
                        std::span<const std::size_t> new_local) {
  CycleRecord record;
  record.cycle = cycle;
  record.labeled_count = arm.labeled.size();
  record.test_accuracy = test_accuracy(arm.learner, dataset);
  record.covering_radius = covering_radius(pool_features, arm.labeled);
  record.mean_covering_distance = mean_covering_distance(pool_features, arm.labeled);
  record.selected.reserve(new_local.size());
  for (std::size_t local : new_local) {
    record.selected.push_back(dataset.train_indices[local]);
  }
  return record;
}

}  // namespace

ALExperimentReport run_experiment(const SimConfig& config) {
  validate(config);
  ALExperimentReport report;
  report.config = config;

  const std::size_t n_cycles = config.cycle_budgets.size();
  for (std::size_t strategy_pos = 0; strategy_pos < config.strategies.size(); ++strategy_pos) {
    const Strategy strategy = config.strategies[strategy_pos];
    for (std::uint64_t seed : config.seeds) {
      const SimDataset dataset = generate_mixture(config, seed);
      const EmbeddingMatrix pool_features =
          gather_rows(dataset.features, dataset.train_indices);
      std::vector<int> pool_labels(dataset.train_indices.size());
      for (std::size_t p = 0; p < dataset.train_indices.size(); ++p) {
        pool_labels[p] = dataset.labels[dataset.train_indices[p]];
      }

      // Initial labeled set: shared stream so arms with the same seed are
      // paired.
      const std::uint64_t initial_seed = derive_seed(seed, kStreamInitial);
      IndexSet initial;
      if (config.initial_selection == InitialSelection::InitialDiversity) {
        initial = initial_select(pool_features, config.initial_budget, initial_seed);
      } else {
        QueryInputs inputs;
        inputs.pool_size = pool_features.n_samples();
        inputs.config.strategy = Strategy::Random;
        inputs.config.budget = config.initial_budget;
        inputs.config.seed = initial_seed;
        initial = query(inputs);
      }

      RunRecord run;
      run.strategy = strategy;
      run.seed = seed;

      ArmState arm;
      arm.labeled = initial;
      arm.learner = train_on_labeled(pool_features, pool_labels, arm.labeled, config);
      run.cycles.push_back(make_record(0, arm, pool_features, dataset, initial.indices()));

      for (std::size_t cycle = 0; cycle < n_cycles; ++cycle) {
        const PredictionTensor predictions = simulate_predictions(
            arm.learner, pool_features, config.n_augmentations, config.augmentation_noise,
            derive_seed(seed, cycle_stream(strategy_pos, cycle, false)));

        QueryInputs inputs;
        inputs.activations = &pool_features;
        inputs.predictions = &predictions;
        inputs.ssl_embeddings = &pool_features;
        inputs.labeled = arm.labeled;
        inputs.config.strategy = strategy;
        inputs.config.temperature = config.temperature;
        inputs.config.budget = config.cycle_budgets[cycle];
        inputs.config.seed = derive_seed(seed, cycle_stream(strategy_pos, cycle, true));
        inputs.config.seed_with_labeled = config.consistency_seed_with_labeled;

        SelectionDiagnostics diagnostics;
        const IndexSet picked = query(inputs, &diagnostics);
        run.degenerate_draws += diagnostics.degenerate_uniform_draws;
        for (std::size_t local : picked) arm.labeled.add(local);
        arm.learner = train_on_labeled(pool_features, pool_labels, arm.labeled, config);
        run.cycles.push_back(
            make_record(cycle + 1, arm, pool_features, dataset, picked.indices()));
      }
      report.runs.push_back(std::move(run));
    }
  }

  // Aggregates: mean and standard error over seeds per (strategy, cycle).
  const auto n_seeds = static_cast<double>(config.seeds.size());
  for (std::size_t strategy_pos = 0; strategy_pos < config.strategies.size(); ++strategy_pos) {
    for (std::size_t cycle = 0; cycle <= n_cycles; ++cycle) {
      AggregateRecord agg;
      agg.strategy = config.strategies[strategy_pos];
      agg.cycle = cycle;
      std::vector<double> accuracies;
      std::vector<double> radii;
      for (std::size_t s = 0; s < config.seeds.size(); ++s) {
        const RunRecord& run = report.runs[strategy_pos * config.seeds.size() + s];
        accuracies.push_back(run.cycles[cycle].test_accuracy);
        radii.push_back(run.cycles[cycle].covering_radius);
        agg.labeled_count = run.cycles[cycle].labeled_count;
      }
      auto mean_of = [&](const std::vector<double>& xs) {
        double m = 0.0;
        for (double x : xs) m += x;
        return m / n_seeds;
      };
      auto stderr_of = [&](const std::vector<double>& xs, double mean) {
        if (xs.size() < 2) return 0.0;
        double sq = 0.0;
        for (double x : xs) sq += (x - mean) * (x - mean);
        return std::sqrt(sq / (n_seeds - 1.0)) / std::sqrt(n_seeds);
      };
      agg.mean_accuracy = mean_of(accuracies);
      agg.stderr_accuracy = stderr_of(accuracies, agg.mean_accuracy);
      agg.mean_covering_radius = mean_of(radii);
      agg.stderr_covering_radius = stderr_of(radii, agg.mean_covering_radius);
      report.aggregates.push_back(agg);
    }
  }
  return report;
}

}  // namespace alsel
