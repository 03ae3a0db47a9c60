#include "alsel/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace alsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_index(std::size_t index, std::size_t n) {
  if (index >= n) {
    throw ValidationError(ValidationIssue::IndexOutOfRange,
                          "sample index " + std::to_string(index) + " out of range [0, " +
                              std::to_string(n) + ")",
                          {static_cast<std::int64_t>(index), -1, -1});
  }
}

}  // namespace

double row_distance(const EmbeddingMatrix& embeddings, std::size_t i, std::size_t j) {
  const std::span<const float> a = embeddings.row(i);
  const std::span<const float> b = embeddings.row(j);
  double sq = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = static_cast<double>(a[k]) - static_cast<double>(b[k]);
    sq += diff * diff;
  }
  return std::sqrt(sq);
}

SelectionState SelectionState::initial(std::size_t n_samples, std::uint64_t seed) {
  SelectionState state;
  state.min_dist.assign(n_samples, kInf);
  state.rng.seed(seed);
  return state;
}

SelectionState SelectionState::seeded(const EmbeddingMatrix& embeddings, const IndexSet& seed_set,
                                      std::uint64_t seed) {
  validate(seed_set, embeddings.n_samples());
  SelectionState state = initial(embeddings.n_samples(), seed);
  for (std::size_t index : seed_set) {
    update_min_distances(state, embeddings, index);
  }
  return state;
}

std::vector<double> min_distances(const EmbeddingMatrix& embeddings, const IndexSet& selected) {
  if (selected.empty()) {
    throw ValidationError(ValidationIssue::InvalidArgument,
                          "min_distances requires a non-empty selected set");
  }
  validate(selected, embeddings.n_samples());
  std::vector<double> result(embeddings.n_samples(), kInf);
  for (std::size_t j : selected) {
    for (std::size_t i = 0; i < embeddings.n_samples(); ++i) {
      const double d = row_distance(embeddings, i, j);
      if (d < result[i]) result[i] = d;
    }
  }
  return result;
}

void update_min_distances(SelectionState& state, const EmbeddingMatrix& embeddings,
                          std::size_t new_index) {
  check_index(new_index, embeddings.n_samples());
  if (state.selected.contains(new_index)) {
    throw ValidationError(ValidationIssue::DuplicateIndex,
                          "index " + std::to_string(new_index) + " is already selected",
                          {static_cast<std::int64_t>(new_index), -1, -1});
  }
  for (std::size_t i = 0; i < embeddings.n_samples(); ++i) {
    const double d = row_distance(embeddings, i, new_index);
    if (d < state.min_dist[i]) state.min_dist[i] = d;
  }
  state.min_dist[new_index] = 0.0;
  state.selected.add(new_index);
}

std::optional<std::vector<double>> selection_probabilities(std::span<const double> min_dist,
                                                           double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ValidationError(ValidationIssue::InvalidArgument,
                          "temperature must be finite and > 0");
  }
  if (min_dist.empty()) {
    throw ValidationError(ValidationIssue::InvalidArgument, "empty distance vector");
  }
  double max_log = -kInf;
  for (double d : min_dist) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw ValidationError(ValidationIssue::InvalidArgument,
                            "distances must be finite and nonnegative");
    }
    if (d > 0.0) max_log = std::max(max_log, std::log(d));
  }
  if (max_log == -kInf) {
    return std::nullopt;  // every candidate duplicates a selected point
  }

  // d^(1/T) / sum = exp((log d - max log d)/T) / normalizer: exponents are
  // <= 0, so nothing overflows no matter how small T gets.
  const double inv_t = 1.0 / temperature;
  std::vector<double> probs(min_dist.size(), 0.0);
  double norm = 0.0;
  for (std::size_t i = 0; i < min_dist.size(); ++i) {
    if (min_dist[i] > 0.0) {
      probs[i] = std::exp(inv_t * (std::log(min_dist[i]) - max_log));
      norm += probs[i];
    }
  }
  for (double& p : probs) p /= norm;
  return probs;
}

std::size_t sample_next(SelectionState& state, Temperature temperature) {
  const std::size_t n = state.min_dist.size();
  if (state.selected.size() >= n) {
    throw ValidationError(ValidationIssue::InvalidArgument, "candidate pool is exhausted");
  }
  if (state.selected.empty()) {
    return uniform_index(state.rng, n);
  }
  if (temperature.is_greedy()) {
    std::size_t best = n;
    double best_dist = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!state.selected.contains(i) && state.min_dist[i] > best_dist) {
        best = i;
        best_dist = state.min_dist[i];
      }
    }
    return best;
  }
  const auto probs = selection_probabilities(state.min_dist, temperature.value());
  if (!probs) {
    // Duplicate-saturated pool: fall back to a uniform pick among the
    // unselected and record the event.
    ++state.diagnostics.degenerate_uniform_draws;
    std::vector<std::size_t> pool;
    pool.reserve(n - state.selected.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!state.selected.contains(i)) pool.push_back(i);
    }
    return pool[uniform_index(state.rng, pool.size())];
  }
  return weighted_index(state.rng, *probs);
}

IndexSet select_batch(const EmbeddingMatrix& embeddings, const IndexSet& seed_set,
                      std::size_t budget, Temperature temperature, std::uint64_t seed,
                      SelectionDiagnostics* diagnostics) {
  const std::size_t n = embeddings.n_samples();
  validate(seed_set, n);
  if (budget > n - seed_set.size()) {
    throw ValidationError(ValidationIssue::BudgetTooLarge,
                          "budget " + std::to_string(budget) + " exceeds pool of " +
                              std::to_string(n - seed_set.size()) + " unselected samples");
  }
  SelectionState state = SelectionState::seeded(embeddings, seed_set, seed);
  IndexSet picked;
  for (std::size_t b = 0; b < budget; ++b) {
    const std::size_t next = sample_next(state, temperature);
    update_min_distances(state, embeddings, next);
    picked.add(next);
  }
  if (diagnostics) *diagnostics = state.diagnostics;
  return picked;
}

double covering_radius(const EmbeddingMatrix& embeddings, const IndexSet& centers) {
  const std::vector<double> dists = min_distances(embeddings, centers);
  double radius = 0.0;
  for (double d : dists) radius = std::max(radius, d);
  return radius;
}

double mean_covering_distance(const EmbeddingMatrix& embeddings, const IndexSet& centers) {
  const std::vector<double> dists = min_distances(embeddings, centers);
  double total = 0.0;
  for (double d : dists) total += d;
  return total / static_cast<double>(dists.size());
}

}  // namespace alsel
