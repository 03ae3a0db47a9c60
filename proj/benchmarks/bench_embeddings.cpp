#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "alsel/embeddings.hpp"

namespace {

alsel::PredictionTensor make_predictions(std::size_t n, std::size_t k, std::size_t c) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist(0.0, 1.5);
  std::vector<float> values(n * k * c);
  std::vector<double> logits(c);
  for (std::size_t row = 0; row < n * k; ++row) {
    double norm = 0.0;
    for (std::size_t cc = 0; cc < c; ++cc) {
      logits[cc] = std::exp(dist(rng));
      norm += logits[cc];
    }
    for (std::size_t cc = 0; cc < c; ++cc) {
      values[row * c + cc] = static_cast<float>(logits[cc] / norm);
    }
  }
  return alsel::PredictionTensor(n, k, c, std::move(values));
}

alsel::EmbeddingMatrix make_activations(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> values(n * d);
  for (float& v : values) v = dist(rng);
  return alsel::EmbeddingMatrix(n, d, std::move(values));
}

void BM_ClasswiseVariance(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const alsel::PredictionTensor tensor = make_predictions(n, k, 10);
  for (auto _ : state) {
    auto variances = alsel::classwise_variance(tensor);
    benchmark::DoNotOptimize(variances.values().data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n * k * 10));
}
BENCHMARK(BM_ClasswiseVariance)->Args({2000, 10})->Args({2000, 50})->Args({20000, 10});

void BM_ConsistencyEmbedding(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const alsel::PredictionTensor tensor = make_predictions(n, 10, 10);
  const alsel::EmbeddingMatrix activations = make_activations(n, 128);
  const alsel::VarianceMatrix variances = alsel::classwise_variance(tensor);
  for (auto _ : state) {
    auto embedding = alsel::consistency_embedding(activations, variances);
    benchmark::DoNotOptimize(embedding.base.values().data());
  }
}
BENCHMARK(BM_ConsistencyEmbedding)->Arg(2000)->Arg(20000);

void BM_BadgeGradientEmbedding(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const alsel::PredictionTensor tensor = make_predictions(n, 10, 10);
  const alsel::EmbeddingMatrix activations = make_activations(n, 128);
  const alsel::EmbeddingMatrix means = alsel::mean_probabilities(tensor);
  for (auto _ : state) {
    auto gradients = alsel::badge_gradient_embedding(activations, means);
    benchmark::DoNotOptimize(gradients.values().data());
  }
}
BENCHMARK(BM_BadgeGradientEmbedding)->Arg(2000)->Arg(20000);

}  // namespace
