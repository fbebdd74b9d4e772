#pragma once

#include <optional>

#include "losses.hpp"
#include "model.hpp"

namespace sgldl {

struct Batch {
  Matrix inputs;       // samples x input_dim
  Matrix targets;      // samples x labels (cumulative space)
  Matrix old_outputs;  // samples x old labels; filled from the old model when empty
};

struct ObjectiveOptions {
  LossWeights weights;
  std::size_t first_new = 0;  // 0 on the first task
  bool compensate = true;     // false: plain mean Canberra in place of the NC loss
  // Use these compensation weights instead of recomputing them (they are
  // constants of the objective, so a finite-difference probe must pin them).
  std::optional<Matrix> frozen_weights;
};

struct NetworkGradients {
  ExtractorParams extractor;
  GcnParams gcn;
  Matrix dense_head;
};

struct ObjectiveResult {
  double total = 0.0;
  double nc = 0.0;
  double dt = 0.0;
  double rp = 0.0;
  Matrix compensation;  // weights applied to the Canberra terms
  NetworkGradients grad;
};

// lambda_nc * NC + lambda_dt * DT + lambda_rp * RP with the gradient on every
// trainable parameter. DT and RP are inactive on the first task. On later
// tasks an active DT term needs `old_model` (or batch.old_outputs) and an
// active RP term needs `stored_embedding`.
ObjectiveResult total_loss(const Network& net, const Batch& batch, const Network* old_model,
                           const Matrix* stored_embedding, const ObjectiveOptions& options);

}  // namespace sgldl
