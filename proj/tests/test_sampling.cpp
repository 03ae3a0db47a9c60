#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "alsel/sampling.hpp"
#include "test_util.hpp"

using namespace alsel;

namespace {

// Independent oracle: exhaustive double loop over selected indices, long
// double accumulation.
std::vector<double> brute_force_min_distances(const EmbeddingMatrix& emb,
                                              const std::vector<std::size_t>& selected) {
  std::vector<double> out(emb.n_samples(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < emb.n_samples(); ++i) {
    for (std::size_t j : selected) {
      long double sq = 0.0L;
      for (std::size_t k = 0; k < emb.dim(); ++k) {
        const long double diff =
            static_cast<long double>(emb.at(i, k)) - static_cast<long double>(emb.at(j, k));
        sq += diff * diff;
      }
      out[i] = std::min(out[i], static_cast<double>(std::sqrt(sq)));
    }
  }
  return out;
}

EmbeddingMatrix points_1d(std::initializer_list<float> xs) {
  std::vector<float> values(xs);
  const std::size_t n = values.size();
  return EmbeddingMatrix(n, 1, std::move(values));
}

}  // namespace

TEST_CASE("min_distances basics") {
  const EmbeddingMatrix emb = points_1d({0.0f, 3.0f, 5.0f});

  SUBCASE("single selected point gives direct distances") {
    const std::vector<double> d = min_distances(emb, IndexSet({0}));
    CHECK(d == std::vector<double>{0.0, 3.0, 5.0});
  }
  SUBCASE("selecting everything zeroes the vector") {
    const std::vector<double> d = min_distances(emb, IndexSet({0, 1, 2}));
    CHECK(d == std::vector<double>{0.0, 0.0, 0.0});
  }
  SUBCASE("empty selection is an error") {
    CHECK_THROWS_AS(min_distances(emb, IndexSet{}), ValidationError);
  }
  SUBCASE("out-of-range selected index is an error") {
    CHECK_THROWS_AS(min_distances(emb, IndexSet({3})), ValidationError);
  }
}

TEST_CASE("min_distances matches brute force on random instances") {
  const EmbeddingMatrix emb = testing::random_matrix(100, 4, 41);
  const std::vector<std::size_t> selected = {17, 3, 99, 58, 20};
  const std::vector<double> got = min_distances(emb, IndexSet(selected));
  const std::vector<double> want = brute_force_min_distances(emb, selected);
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("update_min_distances") {
  const EmbeddingMatrix emb = points_1d({0.0f, 3.0f, 5.0f});

  SUBCASE("hand-checked update") {
    SelectionState state = SelectionState::seeded(emb, IndexSet({0}), 0);
    update_min_distances(state, emb, 2);
    CHECK(state.min_dist == std::vector<double>{0.0, 2.0, 0.0});
    CHECK(state.selected.indices() == std::vector<std::size_t>{0, 2});
  }
  SUBCASE("new index maps to zero") {
    SelectionState state = SelectionState::initial(3, 0);
    update_min_distances(state, emb, 1);
    CHECK(state.min_dist[1] == 0.0);
  }
  SUBCASE("duplicate insertion rejected") {
    SelectionState state = SelectionState::seeded(emb, IndexSet({0}), 0);
    CHECK_THROWS_AS(update_min_distances(state, emb, 0), ValidationError);
  }
}

TEST_CASE("incremental updates agree with recomputation from scratch") {
  const EmbeddingMatrix emb = testing::random_matrix(1000, 16, 7);
  std::mt19937_64 picker(123);
  SelectionState state = SelectionState::initial(emb.n_samples(), 0);
  std::vector<std::size_t> chosen;
  for (int step = 0; step < 50; ++step) {
    std::size_t next = 0;
    do {
      next = picker() % emb.n_samples();
    } while (state.selected.contains(next));
    update_min_distances(state, emb, next);
    chosen.push_back(next);
  }
  const std::vector<double> scratch = min_distances(emb, IndexSet(chosen));
  for (std::size_t i = 0; i < scratch.size(); ++i) {
    CHECK(std::abs(state.min_dist[i] - scratch[i]) <= 1e-6);
  }
}

TEST_CASE("selection probabilities") {
  SUBCASE("T=1 is plain distance weighting") {
    const std::vector<double> d = {1.0, 2.0, 3.0};
    const auto p = selection_probabilities(d, 1.0);
    REQUIRE(p.has_value());
    CHECK((*p)[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK((*p)[1] == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
    CHECK((*p)[2] == doctest::Approx(3.0 / 6.0).epsilon(1e-12));
  }
  SUBCASE("T=0.5 is squared-distance weighting (k-means++)") {
    const std::vector<double> d = {1.0, 2.0};
    const auto p = selection_probabilities(d, 0.5);
    REQUIRE(p.has_value());
    CHECK((*p)[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK((*p)[1] == doctest::Approx(0.8).epsilon(1e-12));
  }
  SUBCASE("extreme magnitudes stay finite and match the extended-precision oracle") {
    const std::vector<double> d = {1e30, 1e-30, 5.0};
    const auto p = selection_probabilities(d, 0.25);
    REQUIRE(p.has_value());
    double sum = 0.0;
    for (double v : *p) {
      CHECK(std::isfinite(v));
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((*p)[0] > (*p)[1]);
    CHECK((*p)[0] > (*p)[2]);

    // direct d^4 normalization in extended precision
    long double weights[3];
    long double norm = 0.0L;
    for (int i = 0; i < 3; ++i) {
      weights[i] = std::pow(static_cast<long double>(d[i]), 4.0L);
      norm += weights[i];
    }
    for (int i = 0; i < 3; ++i) {
      CHECK((*p)[i] == doctest::Approx(static_cast<double>(weights[i] / norm)).epsilon(1e-12));
    }
  }
  SUBCASE("zero distance keeps probability exactly zero") {
    const std::vector<double> d = {0.0, 2.0, 0.0, 1.0};
    const auto p = selection_probabilities(d, 0.7);
    REQUIRE(p.has_value());
    CHECK((*p)[0] == 0.0);
    CHECK((*p)[2] == 0.0);
  }
  SUBCASE("all-zero vector signals the fallback case") {
    const std::vector<double> d = {0.0, 0.0};
    CHECK(!selection_probabilities(d, 1.0).has_value());
  }
  SUBCASE("bad inputs throw") {
    const std::vector<double> d = {1.0, -0.5};
    CHECK_THROWS_AS(selection_probabilities(d, 1.0), ValidationError);
    const std::vector<double> ok = {1.0};
    CHECK_THROWS_AS(selection_probabilities(ok, 0.0), ValidationError);
    CHECK_THROWS_AS(selection_probabilities(std::vector<double>{}, 1.0), ValidationError);
  }
}

TEST_CASE("probability invariance under positive scaling of all distances") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  for (double scale : {1e-6, 3.7, 1e6}) {
    for (double t : {0.25, 0.5, 1.0, 4.0}) {
      std::vector<double> d(32);
      for (double& v : d) v = dist(rng);
      d[5] = 0.0;  // mix in an already-selected sample
      std::vector<double> scaled = d;
      for (double& v : scaled) v *= scale;
      const auto p = selection_probabilities(d, t);
      const auto q = selection_probabilities(scaled, t);
      REQUIRE(p.has_value());
      REQUIRE(q.has_value());
      for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(std::abs((*p)[i] - (*q)[i]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("sample_next") {
  const EmbeddingMatrix emb = points_1d({0.0f, 3.0f, 5.0f});

  SUBCASE("greedy takes the farthest candidate") {
    SelectionState state = SelectionState::seeded(emb, IndexSet({0}), 0);
    CHECK(state.min_dist == std::vector<double>{0.0, 3.0, 5.0});
    CHECK(sample_next(state, Temperature::greedy()) == 2);
  }
  SUBCASE("greedy ties resolve to the smallest index") {
    SelectionState state = SelectionState::initial(3, 0);
    state.selected.add(0);
    state.min_dist = {0.0, 4.0, 4.0};
    CHECK(sample_next(state, Temperature::greedy()) == 1);
  }
  SUBCASE("finite-T frequencies converge to the analytic distribution") {
    SelectionState state = SelectionState::initial(3, 11);
    state.selected.add(0);
    state.min_dist = {0.0, 1.0, 3.0};
    std::array<int, 3> counts = {0, 0, 0};
    const int n_draws = 100000;
    for (int rep = 0; rep < n_draws; ++rep) {
      ++counts[sample_next(state, Temperature::finite(1.0))];
    }
    CHECK(counts[0] == 0);
    CHECK(std::abs(counts[1] / double(n_draws) - 0.25) <= 0.01);
    CHECK(std::abs(counts[2] / double(n_draws) - 0.75) <= 0.01);
  }
  SUBCASE("exhausted pool throws") {
    SelectionState state = SelectionState::seeded(emb, IndexSet({0, 1, 2}), 0);
    CHECK_THROWS_AS(sample_next(state, Temperature::greedy()), ValidationError);
  }
}

TEST_CASE("select_batch") {
  SUBCASE("hand-run greedy on 1-D points") {
    // pool (0, 1, 10, 11), seeded with point 0: farthest is 11 (index 3),
    // then farthest from {0, 11} is 1 (index 1).
    const EmbeddingMatrix emb = points_1d({0.0f, 1.0f, 10.0f, 11.0f});
    const IndexSet picked = select_batch(emb, IndexSet({0}), 2, Temperature::greedy(), 5);
    CHECK(picked.indices() == std::vector<std::size_t>{3, 1});
  }
  SUBCASE("budget equal to pool size selects everything exactly once") {
    const EmbeddingMatrix emb = testing::random_matrix(12, 3, 8);
    for (auto t : {Temperature::greedy(), Temperature::finite(0.5), Temperature::finite(2.0)}) {
      const IndexSet picked = select_batch(emb, IndexSet{}, 12, t, 17);
      CHECK(picked.size() == 12);
      std::vector<std::size_t> sorted = picked.indices();
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < 12; ++i) CHECK(sorted[i] == i);
    }
  }
  SUBCASE("deterministic for a fixed seed") {
    const EmbeddingMatrix emb = testing::random_matrix(60, 5, 3);
    const IndexSet a = select_batch(emb, IndexSet({1, 2}), 10, Temperature::finite(0.5), 99);
    const IndexSet b = select_batch(emb, IndexSet({1, 2}), 10, Temperature::finite(0.5), 99);
    CHECK(a.indices() == b.indices());
  }
  SUBCASE("output is disjoint from the seed set") {
    const EmbeddingMatrix emb = testing::random_matrix(40, 4, 12);
    const IndexSet seeds({0, 5, 39});
    const IndexSet picked = select_batch(emb, seeds, 20, Temperature::finite(1.0), 4);
    for (std::size_t i : picked) CHECK(!seeds.contains(i));
  }
  SUBCASE("infeasible budget throws") {
    const EmbeddingMatrix emb = testing::random_matrix(5, 2, 1);
    CHECK_THROWS_AS(select_batch(emb, IndexSet({0}), 5, Temperature::greedy(), 0),
                    ValidationError);
  }
  SUBCASE("duplicate-saturated pool falls back to uniform with a diagnostic") {
    // all points identical: after the first pick every distance is zero
    const EmbeddingMatrix emb(4, 2, std::vector<float>(8, 1.5f));
    SelectionDiagnostics diagnostics;
    const IndexSet picked =
        select_batch(emb, IndexSet{}, 3, Temperature::finite(0.5), 21, &diagnostics);
    CHECK(picked.size() == 3);
    CHECK(diagnostics.degenerate_uniform_draws == 2);
  }
}

TEST_CASE("greedy max-min distance is non-increasing across iterations") {
  const EmbeddingMatrix emb = testing::random_matrix(80, 6, 31);
  SelectionState state = SelectionState::seeded(emb, IndexSet({7}), 0);
  double last_peak = std::numeric_limits<double>::infinity();
  for (int step = 0; step < 30; ++step) {
    const std::size_t next = sample_next(state, Temperature::greedy());
    const double peak = state.min_dist[next];  // greedy picks the max
    CHECK(peak <= last_peak + 1e-12);
    last_peak = peak;
    update_min_distances(state, emb, next);
  }
}

TEST_CASE("greedy selection achieves the 2-approximation bound on small instances") {
  std::mt19937_64 rng(555);
  std::uniform_real_distribution<float> coord(-1.0f, 1.0f);
  std::uniform_int_distribution<std::size_t> n_dist(4, 12), d_dist(1, 4), k_dist(1, 4);

  for (int instance = 0; instance < 25; ++instance) {
    const std::size_t n = n_dist(rng), d = d_dist(rng);
    const std::size_t k = std::min(k_dist(rng), n);
    std::vector<float> values(n * d);
    for (float& v : values) v = coord(rng);
    const EmbeddingMatrix emb(n, d, std::move(values));

    const IndexSet greedy_set =
        select_batch(emb, IndexSet{}, k, Temperature::greedy(), instance);
    const double greedy_radius = covering_radius(emb, greedy_set);

    // brute force over every k-subset of centers
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> combo(k);
    auto recurse = [&](auto&& self, std::size_t start, std::size_t depth) -> void {
      if (depth == k) {
        best = std::min(best, covering_radius(emb, IndexSet(combo)));
        return;
      }
      for (std::size_t i = start; i + (k - depth) <= n; ++i) {
        combo[depth] = i;
        self(self, i + 1, depth + 1);
      }
    };
    recurse(recurse, 0, 0);
    CHECK(greedy_radius <= 2.0 * best + 1e-9);
  }
}

TEST_CASE("covering radius") {
  const EmbeddingMatrix emb = points_1d({0.0f, 1.0f, 10.0f});
  CHECK(covering_radius(emb, IndexSet({0})) == doctest::Approx(10.0));
  CHECK(covering_radius(emb, IndexSet({0, 2})) == doctest::Approx(1.0));
}
