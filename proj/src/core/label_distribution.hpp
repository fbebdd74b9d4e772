#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "util.hpp"

namespace sgldl {

using LabelId = std::uint32_t;

// Ordered label set. Order is order of first appearance; a task's space is
// every earlier task's new labels followed by its own.
class LabelSpace {
 public:
  LabelSpace() = default;
  explicit LabelSpace(std::vector<LabelId> ids);

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  LabelId operator[](std::size_t i) const { return ids_[i]; }
  const std::vector<LabelId>& ids() const noexcept { return ids_; }

  std::optional<std::size_t> index_of(LabelId id) const;
  bool contains(LabelId id) const { return index_of(id).has_value(); }
  bool is_prefix_of(const LabelSpace& other) const;
  bool is_subset_of(const LabelSpace& other) const;

  // this ++ added; throws if any id is already present.
  LabelSpace extended(const LabelSpace& added) const;
  LabelSpace prefix(std::size_t n) const;

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

 private:
  std::vector<LabelId> ids_;
};

inline constexpr double kNormalizationTolerance = 1e-9;

// Description degrees aligned to some LabelSpace: each in [0,1], summing to 1.
class LabelDistribution {
 public:
  explicit LabelDistribution(std::vector<double> degrees);

  std::size_t size() const noexcept { return degrees_.size(); }
  double operator[](std::size_t i) const { return degrees_[i]; }
  std::span<const double> degrees() const noexcept { return degrees_; }
  const std::vector<double>& values() const noexcept { return degrees_; }

 private:
  std::vector<double> degrees_;
};

// Distribution metrics plus Canberra. All throw ErrorKind::shape on length mismatch.
double euclidean_distance(std::span<const double> p, std::span<const double> q);
// Standard KL, sum P ln(P/Q) with Q clamped at 1e-12 and 0 ln 0 = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double intersection(std::span<const double> p, std::span<const double> q);
double fidelity(std::span<const double> p, std::span<const double> q);
// Sum |P-Q|/(P+Q); a 0/0 term counts as 0.
double canberra(std::span<const double> p, std::span<const double> q);

// Keep only `learned` labels of `d` (laid out over `space`) and rescale them
// to sum to 1. Throws ErrorKind::degenerate when the kept mass is zero.
LabelDistribution restrict_and_renormalize(const LabelDistribution& d, const LabelSpace& space,
                                           const LabelSpace& learned);

// Max-subtracted softmax. Rejects non-finite scores.
LabelDistribution softmax(std::span<const double> scores);
void softmax_into(std::span<const double> scores, std::span<double> out);

}  // namespace sgldl
