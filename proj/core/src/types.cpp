#include "alsel/types.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace alsel {

namespace {

std::string shape_error(const char* what, std::size_t expected, std::size_t got) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s: expected %zu values, got %zu", what, expected, got);
  return buf;
}

}  // namespace

const char* to_string(ValidationIssue issue) {
  switch (issue) {
    case ValidationIssue::EmptyShape: return "empty-shape";
    case ValidationIssue::NonFinite: return "non-finite";
    case ValidationIssue::ValueOutOfRange: return "value-out-of-range";
    case ValidationIssue::RowSumViolation: return "row-sum-violation";
    case ValidationIssue::TooFewAugmentations: return "too-few-augmentations";
    case ValidationIssue::IndexOutOfRange: return "index-out-of-range";
    case ValidationIssue::DuplicateIndex: return "duplicate-index";
    case ValidationIssue::ShapeMismatch: return "shape-mismatch";
    case ValidationIssue::BudgetTooLarge: return "budget-too-large";
    case ValidationIssue::MissingInput: return "missing-input";
    case ValidationIssue::InvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t n_samples, std::size_t dim,
                                 std::vector<float> values)
    : n_samples_(n_samples), dim_(dim), values_(std::move(values)) {
  if (values_.size() != n_samples_ * dim_) {
    throw ValidationError(ValidationIssue::ShapeMismatch,
                          shape_error("embedding matrix storage", n_samples_ * dim_, values_.size()));
  }
}

PredictionTensor::PredictionTensor(std::size_t n_samples, std::size_t n_augmentations,
                                   std::size_t n_classes, std::vector<float> values)
    : n_samples_(n_samples),
      n_augmentations_(n_augmentations),
      n_classes_(n_classes),
      values_(std::move(values)) {
  if (values_.size() != n_samples_ * n_augmentations_ * n_classes_) {
    throw ValidationError(
        ValidationIssue::ShapeMismatch,
        shape_error("prediction tensor storage", n_samples_ * n_augmentations_ * n_classes_,
                    values_.size()));
  }
}

VarianceMatrix::VarianceMatrix(std::size_t n_samples, std::size_t n_classes,
                               std::vector<double> values)
    : n_samples_(n_samples), n_classes_(n_classes), values_(std::move(values)) {
  if (values_.size() != n_samples_ * n_classes_) {
    throw ValidationError(ValidationIssue::ShapeMismatch,
                          shape_error("variance matrix storage", n_samples_ * n_classes_, values_.size()));
  }
}

IndexSet::IndexSet(std::vector<std::size_t> indices) {
  order_.reserve(indices.size());
  for (std::size_t index : indices) add(index);
}

void IndexSet::add(std::size_t index) {
  if (!lookup_.insert(index).second) {
    throw ValidationError(ValidationIssue::DuplicateIndex,
                          "duplicate index " + std::to_string(index),
                          {static_cast<std::int64_t>(index), -1, -1});
  }
  order_.push_back(index);
}

Temperature Temperature::finite(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ValidationError(ValidationIssue::InvalidArgument,
                          "temperature must be finite and > 0, got " + std::to_string(value));
  }
  return Temperature(false, value);
}

Temperature Temperature::parse(std::string_view text) {
  if (text == "greedy") return greedy();
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ValidationError(ValidationIssue::InvalidArgument,
                          "temperature must be 'greedy' or a positive number, got '" +
                              std::string(text) + "'");
  }
  return finite(value);
}

std::string Temperature::str() const {
  if (greedy_) return "greedy";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", value_);
  return buf;
}

Strategy strategy_from_name(std::string_view name) {
  if (name == "random") return Strategy::Random;
  if (name == "max-entropy") return Strategy::MaxEntropy;
  if (name == "coreset") return Strategy::Coreset;
  if (name == "badge") return Strategy::Badge;
  if (name == "consistency-topk") return Strategy::ConsistencyTopK;
  if (name == "consistency-embedding") return Strategy::ConsistencyEmbedding;
  if (name == "initial-diversity") return Strategy::InitialDiversity;
  throw ValidationError(ValidationIssue::InvalidArgument,
                        "unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Random: return "random";
    case Strategy::MaxEntropy: return "max-entropy";
    case Strategy::Coreset: return "coreset";
    case Strategy::Badge: return "badge";
    case Strategy::ConsistencyTopK: return "consistency-topk";
    case Strategy::ConsistencyEmbedding: return "consistency-embedding";
    case Strategy::InitialDiversity: return "initial-diversity";
  }
  return "unknown";
}

void validate(const EmbeddingMatrix& matrix) {
  if (matrix.n_samples() == 0 || matrix.dim() == 0) {
    throw ValidationError(ValidationIssue::EmptyShape, "embedding matrix must have n_samples >= 1 and dim >= 1");
  }
  const std::span<const float> values = matrix.values();
  for (std::size_t pos = 0; pos < values.size(); ++pos) {
    if (!std::isfinite(values[pos])) {
      const auto i = static_cast<std::int64_t>(pos / matrix.dim());
      const auto j = static_cast<std::int64_t>(pos % matrix.dim());
      throw ValidationError(ValidationIssue::NonFinite,
                            "non-finite value at (" + std::to_string(i) + ", " + std::to_string(j) + ")",
                            {i, j, -1});
    }
  }
}

void validate(const PredictionTensor& tensor, std::size_t min_augmentations) {
  if (tensor.n_samples() == 0 || tensor.n_classes() == 0) {
    throw ValidationError(ValidationIssue::EmptyShape,
                          "prediction tensor must have n_samples >= 1 and n_classes >= 1");
  }
  if (tensor.n_augmentations() < min_augmentations) {
    throw ValidationError(ValidationIssue::TooFewAugmentations,
                          "prediction tensor has K=" + std::to_string(tensor.n_augmentations()) +
                              " augmentations, need K >= " + std::to_string(min_augmentations));
  }
  for (std::size_t i = 0; i < tensor.n_samples(); ++i) {
    for (std::size_t k = 0; k < tensor.n_augmentations(); ++k) {
      const std::span<const float> row = tensor.row(i, k);
      double sum = 0.0;
      for (std::size_t c = 0; c < row.size(); ++c) {
        const float p = row[c];
        const auto coords = std::array<std::int64_t, 3>{
            static_cast<std::int64_t>(i), static_cast<std::int64_t>(k),
            static_cast<std::int64_t>(c)};
        if (!std::isfinite(p)) {
          throw ValidationError(ValidationIssue::NonFinite,
                                "non-finite probability at (" + std::to_string(i) + ", " +
                                    std::to_string(k) + ", " + std::to_string(c) + ")",
                                coords);
        }
        if (p < 0.0f || p > 1.0f) {
          throw ValidationError(ValidationIssue::ValueOutOfRange,
                                "probability outside [0, 1] at (" + std::to_string(i) + ", " +
                                    std::to_string(k) + ", " + std::to_string(c) + "): " +
                                    std::to_string(p),
                                coords);
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        throw ValidationError(ValidationIssue::RowSumViolation,
                              "probabilities at (" + std::to_string(i) + ", " + std::to_string(k) +
                                  ") sum to " + std::to_string(sum) + ", expected 1 within " +
                                  std::to_string(kRowSumTolerance),
                              {static_cast<std::int64_t>(i), static_cast<std::int64_t>(k), -1});
      }
    }
  }
}

void validate(const VarianceMatrix& matrix) {
  if (matrix.n_samples() == 0 || matrix.n_classes() == 0) {
    throw ValidationError(ValidationIssue::EmptyShape,
                          "variance matrix must have n_samples >= 1 and n_classes >= 1");
  }
  const std::span<const double> values = matrix.values();
  for (std::size_t pos = 0; pos < values.size(); ++pos) {
    const double v = values[pos];
    const auto i = static_cast<std::int64_t>(pos / matrix.n_classes());
    const auto c = static_cast<std::int64_t>(pos % matrix.n_classes());
    if (!std::isfinite(v)) {
      throw ValidationError(ValidationIssue::NonFinite,
                            "non-finite variance at (" + std::to_string(i) + ", " + std::to_string(c) + ")",
                            {i, c, -1});
    }
    if (v < 0.0) {
      throw ValidationError(ValidationIssue::ValueOutOfRange,
                            "negative variance at (" + std::to_string(i) + ", " + std::to_string(c) + ")",
                            {i, c, -1});
    }
  }
}

void validate(const IndexSet& set, std::size_t n_samples) {
  for (std::size_t pos = 0; pos < set.size(); ++pos) {
    if (set[pos] >= n_samples) {
      throw ValidationError(ValidationIssue::IndexOutOfRange,
                            "index " + std::to_string(set[pos]) + " out of range [0, " +
                                std::to_string(n_samples) + ")",
                            {static_cast<std::int64_t>(set[pos]), -1, -1});
    }
  }
}

EmbeddingMatrix gather_rows(const EmbeddingMatrix& matrix, std::span<const std::size_t> rows) {
  std::vector<float> values;
  values.reserve(rows.size() * matrix.dim());
  for (std::size_t r : rows) {
    if (r >= matrix.n_samples()) {
      throw ValidationError(ValidationIssue::IndexOutOfRange,
                            "row " + std::to_string(r) + " out of range [0, " +
                                std::to_string(matrix.n_samples()) + ")",
                            {static_cast<std::int64_t>(r), -1, -1});
    }
    const std::span<const float> row = matrix.row(r);
    values.insert(values.end(), row.begin(), row.end());
  }
  return EmbeddingMatrix(rows.size(), matrix.dim(), std::move(values));
}

}  // namespace alsel
