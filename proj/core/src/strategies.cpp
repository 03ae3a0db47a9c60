#include "alsel/strategies.hpp"

#include <algorithm>
#include <numeric>

namespace alsel {

namespace {

std::vector<std::size_t> unlabeled_pool(std::size_t n, const IndexSet& labeled) {
  std::vector<std::size_t> pool;
  pool.reserve(n - labeled.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!labeled.contains(i)) pool.push_back(i);
  }
  return pool;
}

/// Top-B indices from `pool` by descending score; equal scores resolve to
/// the smaller index.
IndexSet top_by_score(const std::vector<std::size_t>& pool, const std::vector<double>& scores,
                      std::size_t budget) {
  std::vector<std::size_t> order = pool;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  IndexSet picked;
  for (std::size_t pos = 0; pos < budget; ++pos) picked.add(order[pos]);
  return picked;
}

/// Uniform sample without replacement via a partial Fisher-Yates pass.
IndexSet uniform_without_replacement(const std::vector<std::size_t>& pool, std::size_t budget,
                                     std::uint64_t seed) {
  std::vector<std::size_t> scratch = pool;
  Rng rng(seed);
  IndexSet picked;
  for (std::size_t b = 0; b < budget; ++b) {
    const std::size_t offset = uniform_index(rng, scratch.size() - b);
    std::swap(scratch[b], scratch[b + offset]);
    picked.add(scratch[b]);
  }
  return picked;
}

/// Runs select_batch on the pool's rows only and maps results back to
/// original indices.
IndexSet select_batch_on_pool(const EmbeddingMatrix& embeddings,
                              const std::vector<std::size_t>& pool, std::size_t budget,
                              Temperature temperature, std::uint64_t seed,
                              SelectionDiagnostics* diagnostics) {
  const EmbeddingMatrix sub = gather_rows(embeddings, pool);
  const IndexSet local = select_batch(sub, IndexSet{}, budget, temperature, seed, diagnostics);
  IndexSet picked;
  for (std::size_t pos : local) picked.add(pool[pos]);
  return picked;
}

const EmbeddingMatrix& need_activations(const QueryInputs& inputs) {
  if (!inputs.activations) {
    throw ValidationError(ValidationIssue::MissingInput,
                          std::string(to_string(inputs.config.strategy)) +
                              " requires activations");
  }
  return *inputs.activations;
}

const PredictionTensor& need_predictions(const QueryInputs& inputs, std::size_t min_k) {
  if (!inputs.predictions) {
    throw ValidationError(ValidationIssue::MissingInput,
                          std::string(to_string(inputs.config.strategy)) +
                              " requires predictions");
  }
  validate(*inputs.predictions, min_k);
  return *inputs.predictions;
}

const EmbeddingMatrix& need_ssl(const QueryInputs& inputs) {
  if (!inputs.ssl_embeddings) {
    throw ValidationError(ValidationIssue::MissingInput,
                          std::string(to_string(inputs.config.strategy)) +
                              " requires ssl-embeddings");
  }
  return *inputs.ssl_embeddings;
}

}  // namespace

RequiredInputs required_inputs(Strategy strategy) {
  switch (strategy) {
    case Strategy::Random: return {};
    case Strategy::MaxEntropy: return {.predictions = true};
    case Strategy::ConsistencyTopK: return {.predictions = true};
    case Strategy::Coreset: return {.activations = true};
    case Strategy::Badge: return {.activations = true, .predictions = true};
    case Strategy::ConsistencyEmbedding: return {.activations = true, .predictions = true};
    case Strategy::InitialDiversity: return {.ssl_embeddings = true};
  }
  return {};
}

IndexSet query(const QueryInputs& inputs, SelectionDiagnostics* diagnostics) {
  const StrategyConfig& config = inputs.config;

  // Establish the pool size from whichever inputs are present and make sure
  // they agree on it.
  std::size_t n = 0;
  auto note_samples = [&](std::size_t count, const char* what) {
    if (count == 0) return;
    if (n == 0) {
      n = count;
    } else if (n != count) {
      throw ValidationError(ValidationIssue::ShapeMismatch,
                            std::string(what) + " disagrees on sample count (" +
                                std::to_string(count) + " vs " + std::to_string(n) + ")");
    }
  };
  if (inputs.activations) note_samples(inputs.activations->n_samples(), "activations");
  if (inputs.predictions) note_samples(inputs.predictions->n_samples(), "predictions");
  if (inputs.ssl_embeddings) note_samples(inputs.ssl_embeddings->n_samples(), "ssl-embeddings");
  note_samples(inputs.pool_size, "pool-size");
  if (n == 0) {
    throw ValidationError(ValidationIssue::MissingInput,
                          "no input provided to size the candidate pool");
  }

  validate(inputs.labeled, n);
  const std::vector<std::size_t> pool = unlabeled_pool(n, inputs.labeled);
  if (config.budget > pool.size()) {
    throw ValidationError(ValidationIssue::BudgetTooLarge,
                          "budget " + std::to_string(config.budget) + " exceeds pool of " +
                              std::to_string(pool.size()) + " unlabeled samples");
  }

  switch (config.strategy) {
    case Strategy::Random:
      return uniform_without_replacement(pool, config.budget, config.seed);

    case Strategy::MaxEntropy: {
      const PredictionTensor& predictions = need_predictions(inputs, 1);
      return top_by_score(pool, entropy_scores(predictions), config.budget);
    }

    case Strategy::ConsistencyTopK: {
      const PredictionTensor& predictions = need_predictions(inputs, 2);
      return top_by_score(pool, consistency_scores(classwise_variance(predictions)),
                          config.budget);
    }

    case Strategy::Coreset: {
      const EmbeddingMatrix& activations = need_activations(inputs);
      validate(activations);
      return select_batch(activations, inputs.labeled, config.budget, Temperature::greedy(),
                          config.seed, diagnostics);
    }

    case Strategy::Badge: {
      const EmbeddingMatrix& activations = need_activations(inputs);
      const PredictionTensor& predictions = need_predictions(inputs, 1);
      validate(activations);
      const EmbeddingMatrix gradients =
          badge_gradient_embedding(activations, mean_probabilities(predictions));
      return select_batch_on_pool(gradients, pool, config.budget, Temperature::finite(0.5),
                                  config.seed, diagnostics);
    }

    case Strategy::ConsistencyEmbedding: {
      const EmbeddingMatrix& activations = need_activations(inputs);
      const PredictionTensor& predictions = need_predictions(inputs, 2);
      validate(activations);
      const ConsistencyEmbedding embedding =
          consistency_embedding(activations, classwise_variance(predictions));
      if (config.seed_with_labeled) {
        return select_batch(embedding.base, inputs.labeled, config.budget, config.temperature,
                            config.seed, diagnostics);
      }
      return select_batch_on_pool(embedding.base, pool, config.budget, config.temperature,
                                  config.seed, diagnostics);
    }

    case Strategy::InitialDiversity: {
      const EmbeddingMatrix& ssl = need_ssl(inputs);
      validate(ssl);
      return select_batch_on_pool(ssl, pool, config.budget, config.temperature, config.seed,
                                  diagnostics);
    }
  }
  throw ValidationError(ValidationIssue::InvalidArgument, "unhandled strategy");
}

IndexSet initial_select(const EmbeddingMatrix& ssl_embeddings, std::size_t budget,
                        std::uint64_t seed) {
  QueryInputs inputs;
  inputs.ssl_embeddings = &ssl_embeddings;
  inputs.config.strategy = Strategy::InitialDiversity;
  inputs.config.temperature = Temperature::finite(0.5);
  inputs.config.budget = budget;
  inputs.config.seed = seed;
  return query(inputs);
}

}  // namespace alsel
