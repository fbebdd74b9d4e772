#include "label_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

namespace sgldl {

LabelSpace::LabelSpace(std::vector<LabelId> ids) : ids_(std::move(ids)) {
  std::unordered_set<LabelId> seen;
  for (LabelId id : ids_) {
    if (!seen.insert(id).second) {
      fail(ErrorKind::invalid_argument, "duplicate label id " + std::to_string(id));
    }
  }
}

std::optional<std::size_t> LabelSpace::index_of(LabelId id) const {
  auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

bool LabelSpace::is_prefix_of(const LabelSpace& other) const {
  return ids_.size() <= other.ids_.size() &&
         std::equal(ids_.begin(), ids_.end(), other.ids_.begin());
}

bool LabelSpace::is_subset_of(const LabelSpace& other) const {
  return std::all_of(ids_.begin(), ids_.end(), [&](LabelId id) { return other.contains(id); });
}

LabelSpace LabelSpace::extended(const LabelSpace& added) const {
  std::vector<LabelId> ids = ids_;
  ids.insert(ids.end(), added.ids_.begin(), added.ids_.end());
  return LabelSpace(std::move(ids));
}

LabelSpace LabelSpace::prefix(std::size_t n) const {
  if (n > ids_.size()) fail(ErrorKind::shape, "prefix longer than label space");
  return LabelSpace(std::vector<LabelId>(ids_.begin(), ids_.begin() + static_cast<std::ptrdiff_t>(n)));
}

LabelDistribution::LabelDistribution(std::vector<double> degrees) : degrees_(std::move(degrees)) {
  if (degrees_.empty()) fail(ErrorKind::invalid_argument, "empty label distribution");
  double sum = 0.0;
  for (double d : degrees_) {
    if (!(d >= 0.0 && d <= 1.0)) {
      fail(ErrorKind::invalid_argument, "description degree outside [0,1]: " + format_double(d));
    }
    sum += d;
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance) {
    fail(ErrorKind::invalid_argument, "degrees sum to " + format_double(sum) + ", not 1");
  }
}

namespace {

void check_lengths(std::span<const double> p, std::span<const double> q, const char* who) {
  if (p.size() != q.size()) {
    fail(ErrorKind::shape, std::string(who) + ": length mismatch " + std::to_string(p.size()) +
                               " vs " + std::to_string(q.size()));
  }
}

}  // namespace

double euclidean_distance(std::span<const double> p, std::span<const double> q) {
  check_lengths(p, q, "euclidean_distance");
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) acc += (p[j] - q[j]) * (p[j] - q[j]);
  return std::sqrt(acc);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  check_lengths(p, q, "kl_divergence");
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] <= 0.0) continue;
    acc += p[j] * std::log(p[j] / std::max(q[j], 1e-12));
  }
  // Rounding can push an identity comparison a hair below zero.
  return std::max(acc, 0.0);
}

double intersection(std::span<const double> p, std::span<const double> q) {
  check_lengths(p, q, "intersection");
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) acc += std::min(p[j], q[j]);
  return acc;
}

double fidelity(std::span<const double> p, std::span<const double> q) {
  check_lengths(p, q, "fidelity");
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) acc += std::sqrt(p[j] * q[j]);
  return acc;
}

double canberra(std::span<const double> p, std::span<const double> q) {
  check_lengths(p, q, "canberra");
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double denom = p[j] + q[j];
    if (denom > 0.0) acc += std::abs(p[j] - q[j]) / denom;
  }
  return acc;
}

LabelDistribution restrict_and_renormalize(const LabelDistribution& d, const LabelSpace& space,
                                           const LabelSpace& learned) {
  if (d.size() != space.size()) fail(ErrorKind::shape, "distribution does not match its label space");
  std::vector<double> kept;
  kept.reserve(learned.size());
  double mass = 0.0;
  for (LabelId id : learned.ids()) {
    auto idx = space.index_of(id);
    if (!idx) fail(ErrorKind::invalid_argument, "label " + std::to_string(id) + " not in distribution space");
    kept.push_back(d[*idx]);
    mass += d[*idx];
  }
  if (!(mass > 0.0)) fail(ErrorKind::degenerate, "zero mass on the learned labels");
  for (double& v : kept) v /= mass;
  return LabelDistribution(std::move(kept));
}

void softmax_into(std::span<const double> scores, std::span<double> out) {
  if (scores.size() != out.size()) fail(ErrorKind::shape, "softmax: output length mismatch");
  if (scores.empty()) fail(ErrorKind::invalid_argument, "softmax of empty scores");
  double hi = -std::numeric_limits<double>::infinity();
  for (double s : scores) {
    if (!std::isfinite(s)) fail(ErrorKind::numeric, "softmax: non-finite score");
    hi = std::max(hi, s);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - hi);
    total += out[i];
  }
  for (double& v : out) v /= total;
}

LabelDistribution softmax(std::span<const double> scores) {
  std::vector<double> out(scores.size());
  softmax_into(scores, out);
  return LabelDistribution(std::move(out));
}

}  // namespace sgldl
