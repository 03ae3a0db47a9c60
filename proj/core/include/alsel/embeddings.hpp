#pragma once

#include <vector>

#include "alsel/types.hpp"

// Embedding spaces and scalar scores the query strategies sample from:
// class-wise prediction variances, consistency-scaled activations,
// cross-entropy gradient embeddings, and entropy scores.
//
// Reductions over the augmentation axis sort the K observations first, so
// every result is exactly invariant under reordering of the augmentations.

namespace alsel {

/// Activations scaled row-wise by the summed class-wise prediction variance:
/// row i of `base` is (sum_c var[i,c]) * v_i, so the embedding norm carries
/// the prediction inconsistency while the direction keeps the
/// representational information.
struct ConsistencyEmbedding {
  EmbeddingMatrix base;
  std::vector<double> scale;  // scale[i] = sum_c var[i,c]
};

/// Unbiased (K-1 divisor) per-class sample variance of the K augmented
/// predictions, two-pass in double precision.
VarianceMatrix classwise_variance(const PredictionTensor& predictions);

/// Variant that prepends the clean (unaugmented) prediction of each sample,
/// giving K+1 observations per variance. `clean_probs` is N x C.
VarianceMatrix classwise_variance(const PredictionTensor& predictions,
                                  const EmbeddingMatrix& clean_probs);

/// Builds the consistency embedding from activations and their variance
/// matrix. The result has the activations' dimensionality.
ConsistencyEmbedding consistency_embedding(const EmbeddingMatrix& activations,
                                           const VarianceMatrix& variances);

/// Per-sample mean probability over the K augmentations, as an N x C matrix.
EmbeddingMatrix mean_probabilities(const PredictionTensor& predictions);

/// Shannon entropy of the K-mean class distribution, natural log,
/// 0 * log 0 = 0. Accepts K = 1.
std::vector<double> entropy_scores(const PredictionTensor& predictions);

/// Summed class-wise prediction variance per sample; the pure-consistency
/// selection criterion.
std::vector<double> consistency_scores(const VarianceMatrix& variances);

/// Last-layer cross-entropy gradient embedding: for each sample the C blocks
/// of length d hold (p_mean[i,c] - 1[c == argmax_c p_mean[i,c]]) * v_i,
/// flattened class-major into an N x (d*C) matrix. Argmax ties resolve to the
/// smallest class.
EmbeddingMatrix badge_gradient_embedding(const EmbeddingMatrix& activations,
                                         const EmbeddingMatrix& mean_probs);

}  // namespace alsel
