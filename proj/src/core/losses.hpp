#pragma once

#include "util.hpp"

namespace sgldl {

// Batch matrices are samples x labels. `first_new` is the index of the first
// label introduced by the current task (0 on the first task, where every
// label is new). Score gradients are with respect to pre-softmax scores.

// d(Canberra term)/d(score_j) through the diagonal of the softmax Jacobian:
// sign(p - y) * 2y / (p + y)^2 * p (1 - p). Zero when p + y == 0.
double gradient_measurement(double predicted, double target);
Matrix gradient_measurements(const Matrix& predicted, const Matrix& targets);

// Mean |measurement| over every sample and every new label.
double new_label_gradient_mean(const Matrix& measurements, std::size_t first_new);

// |G| / G_n for new labels and 1 for old ones, with the 0/0 cases mapped to 1.
Matrix compensation_weights(const Matrix& predicted, const Matrix& targets, std::size_t first_new);

struct ScoreLoss {
  double value = 0.0;
  Matrix score_grad;
};

// (1/b) sum_k sum_j w_jk |p - y| / (p + y); weights act as constants.
ScoreLoss weighted_canberra_loss(const Matrix& predicted, const Matrix& targets, const Matrix& weights);
// Unweighted mean per-sample Canberra distance.
ScoreLoss canberra_loss(const Matrix& predicted, const Matrix& targets);
// New-label-aware gradient compensation loss.
ScoreLoss nc_loss(const Matrix& predicted, const Matrix& targets, std::size_t first_new);

// Cross-entropy of the frozen model's old-label outputs against the current
// model's old-label slice renormalized to sum 1, averaged over the batch.
// Gradient lands on the old-label score columns only.
ScoreLoss dt_loss(const Matrix& predicted, const Matrix& old_outputs);

struct EmbeddingLoss {
  double value = 0.0;
  Matrix grad;  // same shape as `current`
};

// sum over stored rows of ||stored_j - current_j||^2. `stored` aligns with the
// leading rows of `current`.
EmbeddingLoss rp_loss(const Matrix& stored, const Matrix& current);

struct LossWeights {
  double nc = 1.0;
  double dt = 1.0;
  double rp = 1.0;
};

// Push a gradient on probabilities back through the full softmax Jacobian.
Matrix softmax_backward(const Matrix& predicted, const Matrix& prob_grad);

}  // namespace sgldl
