#include "objective.hpp"

namespace sgldl {

ObjectiveResult total_loss(const Network& net, const Batch& batch, const Network* old_model,
                           const Matrix* stored_embedding, const ObjectiveOptions& options) {
  const auto n_labels = static_cast<Eigen::Index>(net.labels.size());
  if (batch.inputs.rows() == 0) fail(ErrorKind::invalid_argument, "total_loss: empty batch");
  if (batch.targets.rows() != batch.inputs.rows() || batch.targets.cols() != n_labels) {
    fail(ErrorKind::shape, "total_loss: targets must be samples x cumulative labels");
  }
  if (options.first_new >= net.labels.size()) fail(ErrorKind::shape, "total_loss: no new labels in this task");
  const bool later_task = options.first_new > 0;
  const bool dt_active = later_task && options.weights.dt != 0.0;
  const bool rp_active = later_task && options.weights.rp != 0.0 && net.head == HeadKind::graph;

  ExtractorCache ext_cache;
  const Matrix features = extract(net.extractor, batch.inputs, &ext_cache);

  std::optional<GcnForward> graph;
  Matrix class_vectors;
  if (net.head == HeadKind::graph) {
    if (static_cast<std::size_t>(net.adjacency.rows()) != net.labels.size()) {
      fail(ErrorKind::state, "total_loss: graph head has no correlation matrix");
    }
    graph = gcn_forward(net.adjacency, net.node_embeddings, net.gcn);
    class_vectors = graph->output;
  } else {
    class_vectors = net.dense_head;
  }

  const Matrix scores = features * class_vectors.transpose();
  Matrix predicted(scores.rows(), scores.cols());
  for (Eigen::Index k = 0; k < scores.rows(); ++k) {
    const Eigen::RowVectorXd row = scores.row(k);
    Eigen::RowVectorXd prob(row.size());
    softmax_into(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())),
                 std::span<double>(prob.data(), static_cast<std::size_t>(prob.size())));
    predicted.row(k) = prob;
  }

  ObjectiveResult out;
  if (options.frozen_weights) {
    out.compensation = *options.frozen_weights;
  } else if (options.compensate) {
    out.compensation = compensation_weights(predicted, batch.targets, options.first_new);
  } else {
    out.compensation = Matrix::Ones(predicted.rows(), predicted.cols());
  }
  const ScoreLoss nc = weighted_canberra_loss(predicted, batch.targets, out.compensation);
  out.nc = nc.value;
  Matrix score_grad = options.weights.nc * nc.score_grad;

  if (dt_active) {
    Matrix computed;
    const Matrix* old_outputs = &batch.old_outputs;
    if (batch.old_outputs.size() == 0) {
      if (!old_model) fail(ErrorKind::state, "total_loss: distillation needs the previous model");
      computed = old_model->predict(batch.inputs);
      old_outputs = &computed;
    }
    if (old_outputs->cols() != static_cast<Eigen::Index>(options.first_new)) {
      fail(ErrorKind::shape, "total_loss: old outputs must cover exactly the old labels");
    }
    const ScoreLoss dt = dt_loss(predicted, *old_outputs);
    out.dt = dt.value;
    score_grad += options.weights.dt * dt.score_grad;
  }

  Matrix class_grad = score_grad.transpose() * features;  // labels x feature_dim
  const Matrix feature_grad = score_grad * class_vectors;  // samples x feature_dim

  if (rp_active) {
    if (!stored_embedding) fail(ErrorKind::state, "total_loss: relationship term needs the stored embedding");
    if (stored_embedding->rows() != static_cast<Eigen::Index>(options.first_new)) {
      fail(ErrorKind::shape, "total_loss: stored embedding must have one row per old label");
    }
    const EmbeddingLoss rp = rp_loss(*stored_embedding, class_vectors);
    out.rp = rp.value;
    class_grad += options.weights.rp * rp.grad;
  }

  out.total = options.weights.nc * out.nc + options.weights.dt * out.dt + options.weights.rp * out.rp;

  const ExtractorGradients eg = extract_backward(net.extractor, ext_cache, feature_grad);
  out.grad.extractor = eg.params;
  if (graph) {
    const GcnGradients gg = gcn_backward(graph->cache, net.gcn, class_grad);
    out.grad.gcn.w1 = gg.w1;
    out.grad.gcn.w2 = gg.w2;
  } else {
    out.grad.dense_head = class_grad;
  }
  return out;
}

}  // namespace sgldl
