#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "alsel/embeddings.hpp"
#include "alsel/io.hpp"
#include "alsel/simulation.hpp"
#include "test_util.hpp"

using namespace alsel;

namespace {

SimConfig tiny_config() {
  SimConfig config;
  config.n_samples = 120;
  config.dim = 3;
  config.n_classes = 3;
  config.cluster_spread = 0.35;
  config.initial_budget = 9;
  config.cycle_budgets = {9, 9};
  config.n_augmentations = 4;
  config.augmentation_noise = 0.25;
  config.seeds = {1, 2};
  config.learner.epochs = 120;
  return config;
}

// Nearest class center in feature space; the Bayes rule for equal isotropic
// clusters.
int nearest_center(const SimDataset& dataset, std::span<const float> x) {
  int best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < dataset.class_centers.n_samples(); ++c) {
    double sq = 0.0;
    for (std::size_t j = 0; j < dataset.class_centers.dim(); ++j) {
      const double diff = double(x[j]) - double(dataset.class_centers.at(c, j));
      sq += diff * diff;
    }
    if (sq < best_sq) {
      best_sq = sq;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("generate_mixture") {
  SUBCASE("identical seeds give byte-identical datasets") {
    const SimConfig config = tiny_config();
    const SimDataset a = generate_mixture(config, 77);
    const SimDataset b = generate_mixture(config, 77);
    CHECK(std::equal(a.features.values().begin(), a.features.values().end(),
                     b.features.values().begin()));
    CHECK(a.labels == b.labels);
    CHECK(a.train_indices == b.train_indices);
    CHECK(a.test_indices == b.test_indices);
    const SimDataset c = generate_mixture(config, 78);
    CHECK(!std::equal(a.features.values().begin(), a.features.values().end(),
                      c.features.values().begin()));
  }

  SUBCASE("class counts are balanced within one") {
    SimConfig config = tiny_config();
    config.n_samples = 100;  // 100 over 3 classes: 34/33/33
    const SimDataset dataset = generate_mixture(config, 5);
    std::vector<int> counts(config.n_classes, 0);
    for (int label : dataset.clean_labels) ++counts[label];
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    CHECK(*hi - *lo <= 1);
  }

  SUBCASE("train/test split is 90/10 and disjoint") {
    const SimConfig config = tiny_config();
    const SimDataset dataset = generate_mixture(config, 9);
    CHECK(dataset.train_indices.size() == 108);
    CHECK(dataset.test_indices.size() == 12);
    std::set<std::size_t> all(dataset.train_indices.begin(), dataset.train_indices.end());
    all.insert(dataset.test_indices.begin(), dataset.test_indices.end());
    CHECK(all.size() == config.n_samples);
  }

  SUBCASE("zero spread and zero noise is perfectly separable") {
    SimConfig config = tiny_config();
    config.cluster_spread = 0.0;
    const SimDataset dataset = generate_mixture(config, 11);
    for (std::size_t i = 0; i < config.n_samples; ++i) {
      CHECK(nearest_center(dataset, dataset.features.row(i)) == dataset.labels[i]);
    }
  }

  SUBCASE("label noise flips an exact count, always to another class") {
    SimConfig config = tiny_config();
    config.n_samples = 200;
    config.label_noise = 0.1;
    const SimDataset dataset = generate_mixture(config, 13);
    std::size_t flipped = 0;
    for (std::size_t i = 0; i < config.n_samples; ++i) {
      if (dataset.labels[i] != dataset.clean_labels[i]) ++flipped;
    }
    CHECK(flipped == 20);
  }

  SUBCASE("more classes than samples is rejected") {
    SimConfig config = tiny_config();
    config.n_samples = 2;
    CHECK_THROWS_AS(generate_mixture(config, 1), ValidationError);
  }
}

TEST_CASE("full-label learner approaches the Monte-Carlo Bayes rate") {
  SimConfig config;
  config.n_samples = 2000;
  config.dim = 8;
  config.n_classes = 8;
  config.cluster_spread = 0.3;  // Bayes accuracy around 0.9 for 8 sphere centers
  config.seeds = {1};
  const SimDataset dataset = generate_mixture(config, 3);

  const EmbeddingMatrix train_features = gather_rows(dataset.features, dataset.train_indices);
  std::vector<int> train_labels;
  for (std::size_t i : dataset.train_indices) train_labels.push_back(dataset.labels[i]);
  LearnerConfig learner_config;
  learner_config.epochs = 1500;
  learner_config.learning_rate = 1.0;
  learner_config.l2_penalty = 1e-6;
  const Learner learner =
      train_learner(train_features, train_labels, config.n_classes, learner_config);

  // Monte-Carlo integration over the known mixture: the Bayes rule is the
  // nearest center; the learner is scored on the same fresh draws.
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> noise(0.0, config.cluster_spread);
  const int n_draws = 200000;
  int bayes_correct = 0;
  int learner_correct = 0;
  std::vector<float> x(config.dim);
  for (int rep = 0; rep < n_draws; ++rep) {
    const auto c = static_cast<int>(rng() % config.n_classes);
    for (std::size_t j = 0; j < config.dim; ++j) {
      x[j] = static_cast<float>(dataset.class_centers.at(c, j) + noise(rng));
    }
    if (nearest_center(dataset, x) == c) ++bayes_correct;
    if (predict_class(learner, x) == c) ++learner_correct;
  }
  const double bayes_rate = bayes_correct / double(n_draws);
  const double learner_rate = learner_correct / double(n_draws);
  CHECK(bayes_rate > 0.85);
  CHECK(std::abs(learner_rate - bayes_rate) <= 0.03);
}

TEST_CASE("train_learner") {
  SUBCASE("separable two-class data reaches perfect accuracy") {
    const EmbeddingMatrix features(4, 1, {-1.0f, -0.9f, 0.9f, 1.0f});
    const std::vector<int> labels = {0, 0, 1, 1};
    LearnerConfig config;
    config.epochs = 500;
    config.learning_rate = 1.0;
    config.l2_penalty = 0.0;
    const Learner learner = train_learner(features, labels, 2, config);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(predict_class(learner, features.row(i)) == labels[i]);
    }
  }

  SUBCASE("zero epochs means uniform predictions and entropy ln C") {
    const EmbeddingMatrix features = testing::random_matrix(5, 3, 17);
    const std::vector<int> labels = {0, 1, 2, 3, 0};
    LearnerConfig config;
    config.epochs = 0;
    const Learner learner = train_learner(features, labels, 4, config);
    for (std::size_t i = 0; i < 5; ++i) {
      const std::vector<double> probs = predict_probabilities(learner, features.row(i));
      for (double p : probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
    }
    const PredictionTensor tensor = simulate_predictions(learner, features, 2, 0.5, 1);
    for (double h : entropy_scores(tensor)) {
      CHECK(h == doctest::Approx(std::log(4.0)).epsilon(1e-6));
    }
  }

  SUBCASE("empty labeled set is rejected") {
    CHECK_THROWS_AS(
        train_learner(EmbeddingMatrix(), std::vector<int>{}, 2, LearnerConfig{}),
        ValidationError);
  }

  SUBCASE("training loss is monotone non-increasing at a suitable step size") {
    const SimConfig config = tiny_config();
    const SimDataset dataset = generate_mixture(config, 21);
    const EmbeddingMatrix features = gather_rows(dataset.features, dataset.train_indices);
    std::vector<int> labels;
    for (std::size_t i : dataset.train_indices) labels.push_back(dataset.labels[i]);

    Learner learner;
    learner.dim = features.dim();
    learner.n_classes = config.n_classes;
    learner.weights.assign(learner.n_classes * learner.dim, 0.0);
    learner.bias.assign(learner.n_classes, 0.0);
    std::vector<double> grad_w(learner.weights.size());
    std::vector<double> grad_b(learner.bias.size());
    const double lr = 0.25;
    double last = learner_loss(learner, features, labels, 1e-4);
    for (int epoch = 0; epoch < 150; ++epoch) {
      learner_gradient(learner, features, labels, 1e-4, grad_w, grad_b);
      for (std::size_t p = 0; p < learner.weights.size(); ++p) {
        learner.weights[p] -= lr * grad_w[p];
      }
      for (std::size_t c = 0; c < learner.bias.size(); ++c) learner.bias[c] -= lr * grad_b[c];
      const double loss = learner_loss(learner, features, labels, 1e-4);
      CHECK(loss <= last + 1e-12);
      last = loss;
    }
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> weight_dist(0.0, 0.7);
  for (int instance = 0; instance < 20; ++instance) {
    const std::size_t n = 4 + instance % 4;
    const std::size_t d = 2 + instance % 3;
    const std::size_t c_count = 2 + instance % 3;
    const EmbeddingMatrix features =
        testing::random_matrix(n, d, 500 + instance, -2.0f, 2.0f);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(rng() % c_count);

    Learner learner;
    learner.dim = d;
    learner.n_classes = c_count;
    learner.weights.resize(c_count * d);
    learner.bias.resize(c_count);
    for (double& w : learner.weights) w = weight_dist(rng);
    for (double& b : learner.bias) b = weight_dist(rng);

    const double l2 = 1e-3;
    std::vector<double> grad_w(learner.weights.size());
    std::vector<double> grad_b(learner.bias.size());
    learner_gradient(learner, features, labels, l2, grad_w, grad_b);

    const double h = 1e-5;
    auto check_entry = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + h;
      const double up = learner_loss(learner, features, labels, l2);
      param = saved - h;
      const double down = learner_loss(learner, features, labels, l2);
      param = saved;
      const double fd = (up - down) / (2.0 * h);
      CHECK(std::abs(analytic - fd) <= 1e-5 * std::max(1.0, std::abs(analytic) + std::abs(fd)));
    };
    for (std::size_t p = 0; p < learner.weights.size(); ++p) {
      check_entry(learner.weights[p], grad_w[p]);
    }
    for (std::size_t c = 0; c < learner.bias.size(); ++c) {
      check_entry(learner.bias[c], grad_b[c]);
    }
  }
}

TEST_CASE("simulate_predictions") {
  const SimConfig config = tiny_config();
  const SimDataset dataset = generate_mixture(config, 51);
  const EmbeddingMatrix features = gather_rows(dataset.features, dataset.train_indices);
  std::vector<int> labels;
  for (std::size_t i : dataset.train_indices) labels.push_back(dataset.labels[i]);
  const Learner learner = train_learner(features, labels, config.n_classes, config.learner);

  SUBCASE("zero augmentation noise gives a zero variance matrix") {
    const PredictionTensor tensor = simulate_predictions(learner, features, 4, 0.0, 9);
    const VarianceMatrix var = classwise_variance(tensor);
    for (double v : var.values()) CHECK(v == 0.0);
  }

  SUBCASE("output is a valid tensor and deterministic in the seed") {
    const PredictionTensor a = simulate_predictions(learner, features, 5, 0.3, 10);
    CHECK_NOTHROW(validate(a));
    const PredictionTensor b = simulate_predictions(learner, features, 5, 0.3, 10);
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    CHECK_THROWS_AS(simulate_predictions(learner, features, 1, 0.3, 10), ValidationError);
  }

  SUBCASE("doubling the noise does not decrease the mean consistency score") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const PredictionTensor narrow = simulate_predictions(learner, features, 6, 0.15, seed);
      const PredictionTensor wide = simulate_predictions(learner, features, 6, 0.30, seed);
      auto mean_score = [](const PredictionTensor& t) {
        const std::vector<double> scores = consistency_scores(classwise_variance(t));
        double total = 0.0;
        for (double s : scores) total += s;
        return total / static_cast<double>(scores.size());
      };
      CHECK(mean_score(wide) >= mean_score(narrow) - 1e-9);
    }
  }

  SUBCASE("K=10 and K=50 variance estimates agree in expectation") {
    // repeated-draw oracle: the unbiased estimator's expectation does not
    // depend on K, so the two means must differ by sampling error only
    const EmbeddingMatrix one_row = gather_rows(features, std::vector<std::size_t>{0});
    auto mean_and_se = [&](std::size_t k, std::uint64_t base) {
      const int reps = 200;
      std::vector<double> scores(reps);
      for (int r = 0; r < reps; ++r) {
        const PredictionTensor t =
            simulate_predictions(learner, one_row, k, 0.25, base + static_cast<std::uint64_t>(r));
        scores[r] = consistency_scores(classwise_variance(t))[0];
      }
      double mean = 0.0;
      for (double s : scores) mean += s;
      mean /= reps;
      double sq = 0.0;
      for (double s : scores) sq += (s - mean) * (s - mean);
      const double se = std::sqrt(sq / (reps - 1.0)) / std::sqrt(double(reps));
      return std::pair<double, double>(mean, se);
    };
    const auto [mean10, se10] = mean_and_se(10, 10000);
    const auto [mean50, se50] = mean_and_se(50, 20000);
    CHECK(std::abs(mean10 - mean50) <= 4.0 * (se10 + se50));
  }
}

TEST_CASE("run_experiment") {
  SUBCASE("labeled sets grow by the budget and never touch the test split") {
    SimConfig config = tiny_config();
    config.strategies = {Strategy::ConsistencyEmbedding, Strategy::Random};
    const ALExperimentReport report = run_experiment(config);
    REQUIRE(report.runs.size() == 4);
    for (const RunRecord& run : report.runs) {
      const SimDataset dataset = generate_mixture(config, run.seed);
      std::set<std::size_t> train(dataset.train_indices.begin(), dataset.train_indices.end());
      std::set<std::size_t> seen;
      REQUIRE(run.cycles.size() == 3);
      std::size_t expected = config.initial_budget;
      for (std::size_t cycle = 0; cycle < run.cycles.size(); ++cycle) {
        const CycleRecord& record = run.cycles[cycle];
        CHECK(record.cycle == cycle);
        if (cycle > 0) expected += config.cycle_budgets[cycle - 1];
        CHECK(record.labeled_count == expected);
        for (std::size_t index : record.selected) {
          CHECK(train.count(index) == 1);
          CHECK(seen.insert(index).second);  // nested growth, no repeats
        }
      }
    }
  }

  SUBCASE("covering radius is non-increasing across cycles") {
    SimConfig config = tiny_config();
    config.strategies = {Strategy::Random, Strategy::Coreset, Strategy::MaxEntropy};
    const ALExperimentReport report = run_experiment(config);
    for (const RunRecord& run : report.runs) {
      for (std::size_t cycle = 1; cycle < run.cycles.size(); ++cycle) {
        CHECK(run.cycles[cycle].covering_radius <=
              run.cycles[cycle - 1].covering_radius + 1e-12);
      }
    }
  }

  SUBCASE("identical configs give identical reports") {
    SimConfig config = tiny_config();
    config.strategies = {Strategy::Random};
    const std::string a = report_to_json(run_experiment(config));
    const std::string b = report_to_json(run_experiment(config));
    CHECK(a == b);
  }

  SUBCASE("exhausting the pool in one cycle equalizes every strategy") {
    SimConfig config = tiny_config();
    config.n_samples = 60;  // train pool 54
    config.initial_budget = 10;
    config.cycle_budgets = {44};
    config.strategies = {Strategy::Random, Strategy::MaxEntropy, Strategy::Coreset,
                         Strategy::ConsistencyEmbedding};
    config.seeds = {5};
    const ALExperimentReport report = run_experiment(config);
    REQUIRE(report.runs.size() == 4);
    const double reference = report.runs[0].cycles.back().test_accuracy;
    for (const RunRecord& run : report.runs) {
      CHECK(run.cycles.back().labeled_count == 54);
      CHECK(run.cycles.back().test_accuracy == reference);
    }
  }

  SUBCASE("aggregates use the standard error over seeds") {
    SimConfig config = tiny_config();
    config.strategies = {Strategy::Random};
    config.seeds = {3, 4};
    const ALExperimentReport report = run_experiment(config);
    REQUIRE(report.aggregates.size() == 3);
    for (const AggregateRecord& agg : report.aggregates) {
      const double a = report.runs[0].cycles[agg.cycle].test_accuracy;
      const double b = report.runs[1].cycles[agg.cycle].test_accuracy;
      const double mean = (a + b) / 2.0;
      const double sd = std::sqrt(((a - mean) * (a - mean) + (b - mean) * (b - mean)) / 1.0);
      CHECK(agg.mean_accuracy == doctest::Approx(mean).epsilon(1e-12));
      CHECK(agg.stderr_accuracy == doctest::Approx(sd / std::sqrt(2.0)).epsilon(1e-9));
    }
  }

  SUBCASE("budget beyond the pool is rejected up front") {
    SimConfig config = tiny_config();
    config.cycle_budgets = {1000};
    CHECK_THROWS_AS(run_experiment(config), ValidationError);
  }
}
