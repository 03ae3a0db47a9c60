#pragma once

#include <cstdint>

#include "alsel/embeddings.hpp"
#include "alsel/sampling.hpp"
#include "alsel/types.hpp"

// The named query strategies. Each is a pure function of its inputs; all
// randomness comes from the config seed.

namespace alsel {

/// Inputs a strategy may consume. Pointers are non-owning and may be null
/// for inputs the chosen strategy does not require.
struct QueryInputs {
  const EmbeddingMatrix* activations = nullptr;
  const PredictionTensor* predictions = nullptr;
  const EmbeddingMatrix* ssl_embeddings = nullptr;
  IndexSet labeled;
  StrategyConfig config;
  // Explicit pool size for strategies that need no matrix input (random).
  // Ignored when any input is present; must agree with it otherwise.
  std::size_t pool_size = 0;
};

/// Which inputs a strategy requires.
struct RequiredInputs {
  bool activations = false;
  bool predictions = false;
  bool ssl_embeddings = false;
};

RequiredInputs required_inputs(Strategy strategy);

/// Selects config.budget unlabeled samples:
///  - random: uniform without replacement.
///  - max-entropy: top-B by mean-prediction entropy, ties to smallest index.
///  - consistency-topk: top-B by summed class-wise prediction variance.
///  - coreset: greedy farthest-point on raw activations, seeded with the
///    labeled set.
///  - badge: gradient embeddings, then T = 0.5 diversity sampling over the
///    unlabeled rows from an empty seed set.
///  - consistency-embedding: consistency embeddings, then diversity sampling
///    at the configured temperature, seeded with the labeled rows (or
///    unseeded over the unlabeled rows when config.seed_with_labeled is
///    false).
///  - initial-diversity: diversity sampling on the self-supervised
///    embeddings at the configured temperature.
/// The result is disjoint from `labeled`, duplicate-free, in selection
/// order, of size exactly config.budget.
IndexSet query(const QueryInputs& inputs, SelectionDiagnostics* diagnostics = nullptr);

/// Initial dataset selection before any model exists: diversity sampling on
/// self-supervised embeddings from an empty seed set with T pinned to 0.5
/// (k-means++ seeding).
IndexSet initial_select(const EmbeddingMatrix& ssl_embeddings, std::size_t budget,
                        std::uint64_t seed);

}  // namespace alsel
