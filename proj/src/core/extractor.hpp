#pragma once

#include <cstdint>

#include "util.hpp"

namespace sgldl {

// input -> hidden1 -> hidden2 -> feature; tanh hiddens, linear head.
// Weights are (out x in).
struct ExtractorParams {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
  Matrix w3;
  Vector b3;

  Eigen::Index input_dim() const { return w1.cols(); }
  Eigen::Index feature_dim() const { return w3.rows(); }
  std::size_t parameter_count() const;
};

// Uniform in +-1/sqrt(fan_in) from the run seed.
ExtractorParams init_extractor(std::size_t input_dim, std::size_t hidden1, std::size_t hidden2,
                               std::size_t feature_dim, std::uint64_t seed);

struct ExtractorCache {
  Matrix input;    // batch x input_dim
  Matrix hidden1;  // post-activation
  Matrix hidden2;
  double print = 0.0;
};

// Rows of `inputs` are samples; returns batch x feature_dim.
Matrix extract(const ExtractorParams& params, const Matrix& inputs, ExtractorCache* cache = nullptr);
Vector extract(const ExtractorParams& params, const Vector& input);

struct ExtractorGradients {
  ExtractorParams params;  // same layout as the weights, summed over the batch
  Matrix input;            // batch x input_dim
};

// `upstream` is batch x feature_dim. Throws ErrorKind::state on a stale cache.
ExtractorGradients extract_backward(const ExtractorParams& params, const ExtractorCache& cache,
                                    const Matrix& upstream);

double fingerprint(const ExtractorParams& params);

}  // namespace sgldl
