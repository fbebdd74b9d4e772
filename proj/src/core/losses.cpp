#include "losses.hpp"

#include <algorithm>
#include <cmath>

namespace sgldl {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorKind::shape, std::string(who) + ": shape mismatch");
  }
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

// d|p - y|/(p + y) / dp
double canberra_term_slope(double p, double y) {
  const double s = p + y;
  if (s <= 0.0) return 0.0;
  return sign(p - y) * 2.0 * y / (s * s);
}

}  // namespace

double gradient_measurement(double predicted, double target) {
  return canberra_term_slope(predicted, target) * predicted * (1.0 - predicted);
}

Matrix gradient_measurements(const Matrix& predicted, const Matrix& targets) {
  check_same_shape(predicted, targets, "gradient_measurements");
  Matrix g(predicted.rows(), predicted.cols());
  for (Eigen::Index k = 0; k < g.rows(); ++k)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(k, j) = gradient_measurement(predicted(k, j), targets(k, j));
  return g;
}

double new_label_gradient_mean(const Matrix& measurements, std::size_t first_new) {
  const auto base = static_cast<Eigen::Index>(first_new);
  if (base >= measurements.cols() || measurements.rows() == 0) {
    fail(ErrorKind::invalid_argument, "new_label_gradient_mean: empty new-label range");
  }
  const auto block = measurements.rightCols(measurements.cols() - base);
  double total = 0.0;
  for (Eigen::Index k = 0; k < block.rows(); ++k)
    for (Eigen::Index j = 0; j < block.cols(); ++j) total += std::abs(block(k, j));
  return total / static_cast<double>(block.size());
}

Matrix compensation_weights(const Matrix& predicted, const Matrix& targets, std::size_t first_new) {
  const Matrix g = gradient_measurements(predicted, targets);
  const double mean_new = new_label_gradient_mean(g, first_new);
  const auto base = static_cast<Eigen::Index>(first_new);
  Matrix w = Matrix::Ones(g.rows(), g.cols());
  if (mean_new > 0.0) {
    for (Eigen::Index k = 0; k < g.rows(); ++k)
      for (Eigen::Index j = base; j < g.cols(); ++j) w(k, j) = std::abs(g(k, j)) / mean_new;
  }
  return w;
}

Matrix softmax_backward(const Matrix& predicted, const Matrix& prob_grad) {
  check_same_shape(predicted, prob_grad, "softmax_backward");
  Matrix out(predicted.rows(), predicted.cols());
  for (Eigen::Index k = 0; k < predicted.rows(); ++k) {
    const double inner = predicted.row(k).dot(prob_grad.row(k));
    out.row(k) = predicted.row(k).array() * (prob_grad.row(k).array() - inner);
  }
  return out;
}

ScoreLoss weighted_canberra_loss(const Matrix& predicted, const Matrix& targets, const Matrix& weights) {
  check_same_shape(predicted, targets, "weighted_canberra_loss");
  check_same_shape(predicted, weights, "weighted_canberra_loss");
  if (predicted.rows() == 0) fail(ErrorKind::invalid_argument, "weighted_canberra_loss: empty batch");
  const double inv_b = 1.0 / static_cast<double>(predicted.rows());
  ScoreLoss out;
  Matrix prob_grad(predicted.rows(), predicted.cols());
  for (Eigen::Index k = 0; k < predicted.rows(); ++k) {
    for (Eigen::Index j = 0; j < predicted.cols(); ++j) {
      const double p = predicted(k, j);
      const double y = targets(k, j);
      const double s = p + y;
      if (s > 0.0) out.value += weights(k, j) * std::abs(p - y) / s;
      prob_grad(k, j) = inv_b * weights(k, j) * canberra_term_slope(p, y);
    }
  }
  out.value *= inv_b;
  out.score_grad = softmax_backward(predicted, prob_grad);
  return out;
}

ScoreLoss canberra_loss(const Matrix& predicted, const Matrix& targets) {
  return weighted_canberra_loss(predicted, targets, Matrix::Ones(predicted.rows(), predicted.cols()));
}

ScoreLoss nc_loss(const Matrix& predicted, const Matrix& targets, std::size_t first_new) {
  return weighted_canberra_loss(predicted, targets, compensation_weights(predicted, targets, first_new));
}

ScoreLoss dt_loss(const Matrix& predicted, const Matrix& old_outputs) {
  constexpr double kClamp = 1e-12;
  if (old_outputs.rows() != predicted.rows() || old_outputs.cols() > predicted.cols() || old_outputs.cols() == 0) {
    fail(ErrorKind::shape, "dt_loss: old outputs do not align with predictions");
  }
  if (predicted.rows() == 0) fail(ErrorKind::invalid_argument, "dt_loss: empty batch");
  const Eigen::Index old_n = old_outputs.cols();
  const double inv_b = 1.0 / static_cast<double>(predicted.rows());
  ScoreLoss out;
  out.score_grad = Matrix::Zero(predicted.rows(), predicted.cols());
  for (Eigen::Index k = 0; k < predicted.rows(); ++k) {
    const double mass = predicted.row(k).head(old_n).sum();
    double unclamped_target_mass = 0.0;
    for (Eigen::Index j = 0; j < old_n; ++j) {
      const double p = predicted(k, j) / mass;
      const double q = old_outputs(k, j);
      if (p > kClamp) {
        out.value -= q * std::log(p);
        unclamped_target_mass += q;
        out.score_grad(k, j) -= inv_b * q;
      } else {
        out.value -= q * std::log(kClamp);
      }
    }
    for (Eigen::Index j = 0; j < old_n; ++j) {
      out.score_grad(k, j) += inv_b * (predicted(k, j) / mass) * unclamped_target_mass;
    }
  }
  out.value *= inv_b;
  return out;
}

EmbeddingLoss rp_loss(const Matrix& stored, const Matrix& current) {
  if (stored.rows() > current.rows() || stored.cols() != current.cols()) {
    fail(ErrorKind::shape, "rp_loss: stored embedding does not align with current embedding");
  }
  EmbeddingLoss out;
  out.grad = Matrix::Zero(current.rows(), current.cols());
  const Matrix diff = current.topRows(stored.rows()) - stored;
  out.value = diff.squaredNorm();
  out.grad.topRows(stored.rows()) = 2.0 * diff;
  return out;
}

}  // namespace sgldl
