#include "alsel/embeddings.hpp"

#include <algorithm>
#include <cmath>

namespace alsel {

namespace {

void check_same_samples(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ValidationError(ValidationIssue::ShapeMismatch,
                          std::string(what) + ": sample counts differ (" + std::to_string(a) +
                              " vs " + std::to_string(b) + ")");
  }
}

// Sorted two-pass sample variance with divisor (count - 1). Sorting makes the
// result independent of the order the observations arrive in.
double sample_variance_sorted(std::vector<double>& obs) {
  std::sort(obs.begin(), obs.end());
  double sum = 0.0;
  for (double x : obs) sum += x;
  const double mean = sum / static_cast<double>(obs.size());
  double sq = 0.0;
  for (double x : obs) sq += (x - mean) * (x - mean);
  return sq / static_cast<double>(obs.size() - 1);
}

VarianceMatrix variance_impl(const PredictionTensor& predictions,
                             const EmbeddingMatrix* clean_probs) {
  validate(predictions, clean_probs ? 1 : 2);
  const std::size_t n = predictions.n_samples();
  const std::size_t k_count = predictions.n_augmentations();
  const std::size_t c_count = predictions.n_classes();
  if (clean_probs) {
    check_same_samples(predictions.n_samples(), clean_probs->n_samples(),
                       "predictions vs clean predictions");
    if (clean_probs->dim() != c_count) {
      throw ValidationError(ValidationIssue::ShapeMismatch,
                            "clean predictions have " + std::to_string(clean_probs->dim()) +
                                " classes, tensor has " + std::to_string(c_count));
    }
  }

  std::vector<double> values(n * c_count);
  std::vector<double> obs;
  obs.reserve(k_count + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < c_count; ++c) {
      obs.clear();
      if (clean_probs) obs.push_back(static_cast<double>(clean_probs->at(i, c)));
      for (std::size_t k = 0; k < k_count; ++k) {
        obs.push_back(static_cast<double>(predictions.at(i, k, c)));
      }
      values[i * c_count + c] = sample_variance_sorted(obs);
    }
  }
  return VarianceMatrix(n, c_count, std::move(values));
}

}  // namespace

VarianceMatrix classwise_variance(const PredictionTensor& predictions) {
  return variance_impl(predictions, nullptr);
}

VarianceMatrix classwise_variance(const PredictionTensor& predictions,
                                  const EmbeddingMatrix& clean_probs) {
  return variance_impl(predictions, &clean_probs);
}

ConsistencyEmbedding consistency_embedding(const EmbeddingMatrix& activations,
                                           const VarianceMatrix& variances) {
  check_same_samples(activations.n_samples(), variances.n_samples(),
                     "activations vs variances");
  const std::size_t n = activations.n_samples();
  const std::size_t d = activations.dim();

  std::vector<double> scale(n);
  std::vector<float> values(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> var_row = variances.row(i);
    double s = 0.0;
    for (double v : var_row) s += v;
    scale[i] = s;
    const std::span<const float> v_row = activations.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      values[i * d + j] = static_cast<float>(s * static_cast<double>(v_row[j]));
    }
  }
  return ConsistencyEmbedding{EmbeddingMatrix(n, d, std::move(values)), std::move(scale)};
}

EmbeddingMatrix mean_probabilities(const PredictionTensor& predictions) {
  validate(predictions, 1);
  const std::size_t n = predictions.n_samples();
  const std::size_t k_count = predictions.n_augmentations();
  const std::size_t c_count = predictions.n_classes();

  std::vector<float> values(n * c_count);
  std::vector<double> obs(k_count);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < c_count; ++c) {
      for (std::size_t k = 0; k < k_count; ++k) {
        obs[k] = static_cast<double>(predictions.at(i, k, c));
      }
      std::sort(obs.begin(), obs.end());
      double sum = 0.0;
      for (double x : obs) sum += x;
      values[i * c_count + c] = static_cast<float>(sum / static_cast<double>(k_count));
    }
  }
  return EmbeddingMatrix(n, c_count, std::move(values));
}

std::vector<double> entropy_scores(const PredictionTensor& predictions) {
  const EmbeddingMatrix mean = mean_probabilities(predictions);
  std::vector<double> scores(mean.n_samples());
  for (std::size_t i = 0; i < mean.n_samples(); ++i) {
    double h = 0.0;
    for (float p_f : mean.row(i)) {
      const double p = static_cast<double>(p_f);
      if (p > 0.0) h -= p * std::log(p);
    }
    scores[i] = h;
  }
  return scores;
}

std::vector<double> consistency_scores(const VarianceMatrix& variances) {
  std::vector<double> scores(variances.n_samples());
  for (std::size_t i = 0; i < variances.n_samples(); ++i) {
    double s = 0.0;
    for (double v : variances.row(i)) s += v;
    scores[i] = s;
  }
  return scores;
}

EmbeddingMatrix badge_gradient_embedding(const EmbeddingMatrix& activations,
                                         const EmbeddingMatrix& mean_probs) {
  check_same_samples(activations.n_samples(), mean_probs.n_samples(),
                     "activations vs mean probabilities");
  const std::size_t n = activations.n_samples();
  const std::size_t d = activations.dim();
  const std::size_t c_count = mean_probs.dim();

  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (float p : mean_probs.row(i)) sum += static_cast<double>(p);
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw ValidationError(ValidationIssue::RowSumViolation,
                            "mean probabilities at sample " + std::to_string(i) + " sum to " +
                                std::to_string(sum),
                            {static_cast<std::int64_t>(i), -1, -1});
    }
  }

  std::vector<float> values(n * d * c_count);
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const float> probs = mean_probs.row(i);
    std::size_t argmax = 0;
    for (std::size_t c = 1; c < c_count; ++c) {
      if (probs[c] > probs[argmax]) argmax = c;
    }
    const std::span<const float> v_row = activations.row(i);
    float* out = values.data() + i * d * c_count;
    for (std::size_t c = 0; c < c_count; ++c) {
      const double coef =
          static_cast<double>(probs[c]) - (c == argmax ? 1.0 : 0.0);
      for (std::size_t j = 0; j < d; ++j) {
        out[c * d + j] = static_cast<float>(coef * static_cast<double>(v_row[j]));
      }
    }
  }
  return EmbeddingMatrix(n, d * c_count, std::move(values));
}

}  // namespace alsel
