#pragma once

#include <cstdint>

#include "label_distribution.hpp"
#include "util.hpp"

namespace sgldl {

// One row per label, drawn from a generator keyed by (seed, label id) so a
// label's row never changes as the label space grows. Entries in [-0.5, 0.5].
Matrix init_node_embeddings(const LabelSpace& labels, std::size_t dim, std::uint64_t seed);

// Row-normalized adjacency with self-loops: (A + I) / rowsum(A + I).
Matrix normalize_adjacency(const Matrix& a);

// Two-layer graph-convolution weights. Shapes depend only on the embedding,
// hidden and feature widths, never on the label count.
struct GcnParams {
  Matrix w1;  // embedding_dim x hidden_dim
  Matrix w2;  // hidden_dim x feature_dim

  Eigen::Index embedding_dim() const { return w1.rows(); }
  Eigen::Index hidden_dim() const { return w1.cols(); }
  Eigen::Index feature_dim() const { return w2.cols(); }
};

GcnParams init_gcn_params(std::size_t embedding_dim, std::size_t hidden_dim, std::size_t feature_dim,
                          std::uint64_t seed);

struct GcnCache {
  Matrix adjacency;   // normalized
  Matrix propagated;  // adjacency * H0
  Matrix hidden;      // tanh(propagated * W1)
  Matrix mixed;       // adjacency * hidden
  double w1_print = 0.0;
  double w2_print = 0.0;
};

struct GcnForward {
  Matrix output;  // labels x feature_dim, one classifier vector per label
  GcnCache cache;
};

// H = adj * tanh(adj * H0 * W1) * W2
GcnForward gcn_forward(const Matrix& adjacency, const Matrix& node_embeddings, const GcnParams& params);

struct GcnGradients {
  Matrix w1;
  Matrix w2;
  Matrix node_embeddings;
};

// Throws ErrorKind::state if `params` changed since the forward pass.
GcnGradients gcn_backward(const GcnCache& cache, const GcnParams& params, const Matrix& upstream);

// softmax(H * feature)
LabelDistribution predict(const Matrix& class_embeddings, const Vector& feature);

}  // namespace sgldl
