#include "extractor.hpp"

#include <cmath>

namespace sgldl {

std::size_t ExtractorParams::parameter_count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size());
}

ExtractorParams init_extractor(std::size_t input_dim, std::size_t hidden1, std::size_t hidden2,
                               std::size_t feature_dim, std::uint64_t seed) {
  if (input_dim == 0 || hidden1 == 0 || hidden2 == 0 || feature_dim == 0) {
    fail(ErrorKind::invalid_argument, "extractor widths must be positive");
  }
  Rng rng(derive_seed({seed, 0x65787472 /* "extr" */}));
  auto layer = [&](std::size_t out, std::size_t in, Matrix& w, Vector& b) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    w.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    b.resize(static_cast<Eigen::Index>(out));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
    for (Eigen::Index r = 0; r < b.size(); ++r) b[r] = rng.uniform(-bound, bound);
  };
  ExtractorParams p;
  layer(hidden1, input_dim, p.w1, p.b1);
  layer(hidden2, hidden1, p.w2, p.b2);
  layer(feature_dim, hidden2, p.w3, p.b3);
  return p;
}

double fingerprint(const ExtractorParams& p) {
  return fingerprint(p.w1) + 3.0 * fingerprint(p.b1) + 5.0 * fingerprint(p.w2) + 7.0 * fingerprint(p.b2) +
         11.0 * fingerprint(p.w3) + 13.0 * fingerprint(p.b3);
}

Matrix extract(const ExtractorParams& params, const Matrix& inputs, ExtractorCache* cache) {
  if (inputs.cols() != params.input_dim()) {
    fail(ErrorKind::shape, "extract: expected input length " + std::to_string(params.input_dim()) + ", got " +
                               std::to_string(inputs.cols()));
  }
  Matrix h1 = ((inputs * params.w1.transpose()).rowwise() + params.b1.transpose()).array().tanh().matrix();
  Matrix h2 = ((h1 * params.w2.transpose()).rowwise() + params.b2.transpose()).array().tanh().matrix();
  Matrix out = (h2 * params.w3.transpose()).rowwise() + params.b3.transpose();
  if (cache) {
    cache->input = inputs;
    cache->hidden1 = std::move(h1);
    cache->hidden2 = std::move(h2);
    cache->print = fingerprint(params);
  }
  return out;
}

Vector extract(const ExtractorParams& params, const Vector& input) {
  return extract(params, Matrix(input.transpose())).row(0).transpose();
}

ExtractorGradients extract_backward(const ExtractorParams& params, const ExtractorCache& cache,
                                    const Matrix& upstream) {
  if (cache.print != fingerprint(params)) fail(ErrorKind::state, "extract_backward: stale forward cache");
  if (upstream.rows() != cache.input.rows() || upstream.cols() != params.feature_dim()) {
    fail(ErrorKind::shape, "extract_backward: upstream gradient has wrong shape");
  }
  ExtractorGradients g;
  g.params.w3 = upstream.transpose() * cache.hidden2;
  g.params.b3 = upstream.colwise().sum().transpose();
  const Matrix d2 = ((upstream * params.w3).array() * (1.0 - cache.hidden2.array().square())).matrix();
  g.params.w2 = d2.transpose() * cache.hidden1;
  g.params.b2 = d2.colwise().sum().transpose();
  const Matrix d1 = ((d2 * params.w2).array() * (1.0 - cache.hidden1.array().square())).matrix();
  g.params.w1 = d1.transpose() * cache.input;
  g.params.b1 = d1.colwise().sum().transpose();
  g.input = d1 * params.w1;
  return g;
}

}  // namespace sgldl
