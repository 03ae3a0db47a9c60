#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "alsel/rng.hpp"
#include "alsel/types.hpp"

// Temperature-generalized diversity sampling. Candidates are weighted by
// d_i^(1/T), where d_i is the L2 distance from sample i to the closest
// already-selected sample. T = 0.5 reproduces k-means++ seeding (squared
// distances); the greedy mode is the farthest-point limit used by
// k-Center-Greedy.

namespace alsel {

/// Counters for rare fallback events surfaced to callers alongside results.
struct SelectionDiagnostics {
  // Finite-T draws that hit an all-zero distance vector (every remaining
  // candidate duplicates a selected point) and fell back to a uniform pick.
  int degenerate_uniform_draws = 0;
};

/// The growing selected set and the per-sample minimum distances it induces.
/// While nothing is selected, min_dist is +infinity everywhere and the first
/// pick is uniform.
struct SelectionState {
  IndexSet selected;
  std::vector<double> min_dist;
  Rng rng;
  SelectionDiagnostics diagnostics;

  /// Empty selection over n_samples candidates.
  static SelectionState initial(std::size_t n_samples, std::uint64_t seed);

  /// Selection already containing seed_set (its min_dist fully computed).
  static SelectionState seeded(const EmbeddingMatrix& embeddings, const IndexSet& seed_set,
                               std::uint64_t seed);
};

/// L2 distance between rows i and j, accumulated in double precision.
double row_distance(const EmbeddingMatrix& embeddings, std::size_t i, std::size_t j);

/// Distance from every sample to its closest selected sample. Exact
/// O(N * |selected| * d) recomputation; selected rows map to zero.
std::vector<double> min_distances(const EmbeddingMatrix& embeddings, const IndexSet& selected);

/// Folds one new selection into the state: min_dist[i] shrinks to
/// min(min_dist[i], ||z_i - z_new||) and new_index joins the selected set.
/// O(N * d), independent of how many samples were selected before.
void update_min_distances(SelectionState& state, const EmbeddingMatrix& embeddings,
                          std::size_t new_index);

/// Normalized selection probabilities d_i^(1/T) / sum_j d_j^(1/T), computed
/// in the log domain with max-subtraction so large exponents cannot
/// overflow. Zero distances map to probability exactly zero. Returns nullopt
/// when every distance is zero (the degenerate duplicate-pool case).
std::optional<std::vector<double>> selection_probabilities(std::span<const double> min_dist,
                                                           double temperature);

/// Draws the next selection. Greedy mode takes the farthest candidate (ties
/// resolved to the smallest index); finite-T mode draws from
/// selection_probabilities. With an empty selection the pick is uniform.
/// Consumes the state's generator; does not modify the selected set.
std::size_t sample_next(SelectionState& state, Temperature temperature);

/// Runs the full loop: starting from seed_set, repeatedly samples and folds
/// in the next index until `budget` new samples are selected. Returns only
/// the new indices, in selection order. Deterministic given (seed, inputs).
IndexSet select_batch(const EmbeddingMatrix& embeddings, const IndexSet& seed_set,
                      std::size_t budget, Temperature temperature, std::uint64_t seed,
                      SelectionDiagnostics* diagnostics = nullptr);

/// Max over all samples of the distance to the closest center: the radius a
/// ball around each center needs to cover the pool.
double covering_radius(const EmbeddingMatrix& embeddings, const IndexSet& centers);

/// Mean over all samples of the distance to the closest center. Less
/// tail-sensitive than the max, so per-seed comparisons of selection
/// strategies concentrate much faster.
double mean_covering_distance(const EmbeddingMatrix& embeddings, const IndexSet& centers);

}  // namespace alsel
