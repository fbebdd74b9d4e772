#include "graph.hpp"

#include <cmath>

namespace sgldl {

namespace {
constexpr std::uint64_t kEmbeddingStream = 0x656d6264;  // "embd"
constexpr std::uint64_t kGcnStream = 0x67636e;          // "gcn"
}  // namespace

Matrix init_node_embeddings(const LabelSpace& labels, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) fail(ErrorKind::invalid_argument, "embedding dimensionality must be >= 1");
  Matrix out(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Rng rng(derive_seed({seed, kEmbeddingStream, labels[i]}));
    for (std::size_t c = 0; c < dim; ++c) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rng.uniform(-0.5, 0.5);
    }
  }
  return out;
}

Matrix normalize_adjacency(const Matrix& a) {
  if (a.rows() != a.cols()) fail(ErrorKind::shape, "adjacency must be square");
  Matrix out = a;
  out.diagonal().array() += 1.0;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double total = out.row(r).sum();
    out.row(r) /= total;
  }
  return out;
}

GcnParams init_gcn_params(std::size_t embedding_dim, std::size_t hidden_dim, std::size_t feature_dim,
                          std::uint64_t seed) {
  Rng rng(derive_seed({seed, kGcnStream}));
  auto fill = [&](Eigen::Index rows, Eigen::Index cols) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
    return m;
  };
  GcnParams p;
  p.w1 = fill(static_cast<Eigen::Index>(embedding_dim), static_cast<Eigen::Index>(hidden_dim));
  p.w2 = fill(static_cast<Eigen::Index>(hidden_dim), static_cast<Eigen::Index>(feature_dim));
  return p;
}

GcnForward gcn_forward(const Matrix& adjacency, const Matrix& node_embeddings, const GcnParams& params) {
  if (adjacency.rows() != adjacency.cols() || adjacency.cols() != node_embeddings.rows()) {
    fail(ErrorKind::shape, "gcn_forward: adjacency does not match node count");
  }
  if (node_embeddings.cols() != params.w1.rows() || params.w1.cols() != params.w2.rows()) {
    fail(ErrorKind::shape, "gcn_forward: weight shapes do not chain");
  }
  GcnForward out;
  out.cache.adjacency = adjacency;
  out.cache.propagated = adjacency * node_embeddings;
  out.cache.hidden = (out.cache.propagated * params.w1).array().tanh().matrix();
  out.cache.mixed = adjacency * out.cache.hidden;
  out.cache.w1_print = fingerprint(params.w1);
  out.cache.w2_print = fingerprint(params.w2);
  out.output = out.cache.mixed * params.w2;
  return out;
}

GcnGradients gcn_backward(const GcnCache& cache, const GcnParams& params, const Matrix& upstream) {
  if (cache.w1_print != fingerprint(params.w1) || cache.w2_print != fingerprint(params.w2)) {
    fail(ErrorKind::state, "gcn_backward: stale forward cache");
  }
  if (upstream.rows() != cache.mixed.rows() || upstream.cols() != params.w2.cols()) {
    fail(ErrorKind::shape, "gcn_backward: upstream gradient has wrong shape");
  }
  GcnGradients g;
  g.w2 = cache.mixed.transpose() * upstream;
  const Matrix d_mixed = upstream * params.w2.transpose();
  const Matrix d_hidden = cache.adjacency.transpose() * d_mixed;
  const Matrix d_pre = (d_hidden.array() * (1.0 - cache.hidden.array().square())).matrix();
  g.w1 = cache.propagated.transpose() * d_pre;
  g.node_embeddings = cache.adjacency.transpose() * (d_pre * params.w1.transpose());
  return g;
}

LabelDistribution predict(const Matrix& class_embeddings, const Vector& feature) {
  if (class_embeddings.cols() != feature.size()) fail(ErrorKind::shape, "predict: feature length mismatch");
  const Vector scores = class_embeddings * feature;
  return softmax(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())));
}

}  // namespace sgldl
