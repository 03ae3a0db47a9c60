#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "alsel/sampling.hpp"

namespace {

alsel::EmbeddingMatrix make_pool(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> values(n * d);
  for (float& v : values) v = dist(rng);
  return alsel::EmbeddingMatrix(n, d, std::move(values));
}

void BM_UpdateMinDistances(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const alsel::EmbeddingMatrix pool = make_pool(n, d);
  std::size_t next = 0;
  for (auto _ : state) {
    state.PauseTiming();
    alsel::SelectionState sel = alsel::SelectionState::initial(n, 1);
    state.ResumeTiming();
    alsel::update_min_distances(sel, pool, next % n);
    benchmark::DoNotOptimize(sel.min_dist.data());
    ++next;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n));
}
BENCHMARK(BM_UpdateMinDistances)->Args({2000, 8})->Args({20000, 64})->Args({100000, 128});

void BM_SelectBatchGreedy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const alsel::EmbeddingMatrix pool = make_pool(n, 16);
  for (auto _ : state) {
    auto picked =
        alsel::select_batch(pool, alsel::IndexSet{}, 32, alsel::Temperature::greedy(), 7);
    benchmark::DoNotOptimize(picked.indices().data());
  }
}
BENCHMARK(BM_SelectBatchGreedy)->Arg(2000)->Arg(20000);

void BM_SelectBatchTemperature(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const alsel::EmbeddingMatrix pool = make_pool(n, 16);
  for (auto _ : state) {
    auto picked =
        alsel::select_batch(pool, alsel::IndexSet{}, 32, alsel::Temperature::finite(0.5), 7);
    benchmark::DoNotOptimize(picked.indices().data());
  }
}
BENCHMARK(BM_SelectBatchTemperature)->Arg(2000)->Arg(20000);

}  // namespace
