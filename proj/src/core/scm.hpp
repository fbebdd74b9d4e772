#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "label_distribution.hpp"
#include "util.hpp"

namespace sgldl {

// Per-sample statistics. std::nullopt marks a sample inadmissible for the pair.

// d_i / d_j, admissible when d_j != 0.
std::optional<double> new_new_stat(double d_i, double d_j);
// d_new / sqrt((1 - d_new) * d_old_pred * d_old); needs d_old_pred != 0,
// d_old != 0 and d_new != 1.
std::optional<double> old_new_stat(double d_new, double d_old, double d_old_pred);
// sqrt((1 - d_new) * d_old_pred * d_old) / d_new, admissible when d_new != 0.
std::optional<double> new_old_stat(double d_new, double d_old, double d_old_pred);

// Population standard deviation over mean. An empty or zero-mean sample set
// carries no correlation evidence and yields 0.
double coefficient_of_variation(std::span<const double> samples);

// One block of the correlation matrix together with the admissible-sample
// count behind every entry.
struct BlockStatistics {
  Matrix values;
  Eigen::MatrixXi counts;
};

// Rows of `targets` are instances, columns the cumulative label space; the
// first `old_count` columns are the labels learned before this task.
// `old_outputs` is the frozen previous model's prediction on the same rows.

// new x new block; entry (i, j) aggregates d_i / d_j.
BlockStatistics compute_m(const Matrix& targets, std::size_t old_count);
// old x new block; entry (a, b) aggregates old_new_stat(d_b, d_a, pred_a).
BlockStatistics compute_e(const Matrix& targets, const Matrix& old_outputs, std::size_t old_count);
// new x old block; entry (b, a) aggregates new_old_stat(d_b, d_a, pred_a).
BlockStatistics compute_r(const Matrix& targets, const Matrix& old_outputs, std::size_t old_count);

// Entries below tau are zeroed (optional sparsification; off by default).
void apply_threshold(Matrix& block, double tau);

// Label-correlation matrix over a cumulative label space, laid out as
// [[old-old, old->new], [new->old, new-new]]. The old-old block is the
// previous task's matrix, copied verbatim.
class ScalableCorrelationMatrix {
 public:
  ScalableCorrelationMatrix() = default;

  // First task: the matrix is the new-new block alone.
  static ScalableCorrelationMatrix first(LabelSpace labels, Matrix m);
  // Rebuild from stored parts; validates shape and entries.
  static ScalableCorrelationMatrix restore(LabelSpace labels, Matrix entries, std::size_t block_boundary);
  static ScalableCorrelationMatrix extend(const ScalableCorrelationMatrix& previous,
                                          const LabelSpace& new_labels, const Matrix& m,
                                          const Matrix& e, const Matrix& r);

  const LabelSpace& labels() const noexcept { return labels_; }
  const Matrix& entries() const noexcept { return entries_; }
  std::size_t block_boundary() const noexcept { return block_boundary_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }

  // Text form: `scm <c> <boundary>`, a comma-separated label-id line, then c
  // rows of 17-significant-digit values. Round-trips bit-exactly.
  std::string to_text() const;
  static ScalableCorrelationMatrix from_text(std::string_view text);

  // `# ` provenance lines (may be empty), then row_label,col_label,value
  // triples in row-major order plus a block-boundary comment.
  std::string to_heatmap_csv(std::string_view provenance = {}) const;

 private:
  ScalableCorrelationMatrix(LabelSpace labels, Matrix entries, std::size_t boundary);
  void validate() const;

  LabelSpace labels_;
  Matrix entries_;
  std::size_t block_boundary_ = 0;
};

}  // namespace sgldl
