#pragma once

// Independent reference implementations used by the tests. They are written
// loop-by-loop from the defining formulas and deliberately share no code with
// the library beyond the data types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "label_distribution.hpp"
#include "model.hpp"
#include "objective.hpp"
#include "util.hpp"

namespace oracle {

using sgldl::Matrix;
using sgldl::Rng;
using sgldl::Vector;

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

inline Matrix tanh_of(Matrix m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std::tanh(m.data()[i]);
  return m;
}

inline std::vector<double> softmax(const std::vector<double>& a) {
  double hi = a[0];
  for (double v : a) hi = std::max(hi, v);
  std::vector<double> out(a.size());
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += out[i] = std::exp(a[i] - hi);
  for (double& v : out) v /= total;
  return out;
}

// Two-pass population coefficient of variation; 0 when empty or zero-mean.
inline double cv(const std::vector<double>& s) {
  if (s.empty()) return 0.0;
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  if (mean == 0.0) return 0.0;
  double var = 0.0;
  for (double v : s) var += (v - mean) * (v - mean);
  var /= static_cast<double>(s.size());
  return std::sqrt(var) / mean;
}

// Per-sample direct summation of the three correlation blocks.
inline Matrix block_m(const Matrix& t, std::size_t old_count) {
  const auto o = static_cast<Eigen::Index>(old_count);
  const Eigen::Index n = t.cols() - o;
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      std::vector<double> s;
      for (Eigen::Index k = 0; k < t.rows(); ++k)
        if (t(k, o + j) != 0.0) s.push_back(t(k, o + i) / t(k, o + j));
      out(i, j) = cv(s);
    }
  return out;
}

inline Matrix block_e(const Matrix& t, const Matrix& pred, std::size_t old_count) {
  const auto o = static_cast<Eigen::Index>(old_count);
  const Eigen::Index n = t.cols() - o;
  Matrix out(o, n);
  for (Eigen::Index a = 0; a < o; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      std::vector<double> s;
      for (Eigen::Index k = 0; k < t.rows(); ++k) {
        const double dn = t(k, o + b), dold = t(k, a), dp = pred(k, a);
        if (dp != 0.0 && dold != 0.0 && dn != 1.0) s.push_back(dn / std::sqrt((1.0 - dn) * dp * dold));
      }
      out(a, b) = cv(s);
    }
  return out;
}

inline Matrix block_r(const Matrix& t, const Matrix& pred, std::size_t old_count) {
  const auto o = static_cast<Eigen::Index>(old_count);
  const Eigen::Index n = t.cols() - o;
  Matrix out(n, o);
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index a = 0; a < o; ++a) {
      std::vector<double> s;
      for (Eigen::Index k = 0; k < t.rows(); ++k) {
        const double dn = t(k, o + b), dold = t(k, a), dp = pred(k, a);
        if (dn != 0.0) s.push_back(std::sqrt((1.0 - dn) * dp * dold) / dn);
      }
      out(b, a) = cv(s);
    }
  return out;
}

inline std::vector<double> random_distribution(Rng& rng, std::size_t n, double zero_prob = 0.0) {
  std::vector<double> d(n);
  double total = 0.0;
  for (double& v : d) {
    v = rng.uniform() < zero_prob ? 0.0 : rng.uniform(0.01, 1.0);
    total += v;
  }
  if (total == 0.0) {
    d[rng.index(n)] = 1.0;
    return d;
  }
  for (double& v : d) v /= total;
  return d;
}

inline Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

inline Matrix random_rows(Rng& rng, Eigen::Index rows, Eigen::Index cols, double zero_prob = 0.0) {
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < rows; ++k) {
    const auto d = random_distribution(rng, static_cast<std::size_t>(cols), zero_prob);
    for (Eigen::Index j = 0; j < cols; ++j) m(k, j) = d[static_cast<std::size_t>(j)];
  }
  return m;
}

// Every trainable scalar of a network, addressed uniformly for finite
// differences.
inline std::vector<double*> parameters(sgldl::Network& net) {
  std::vector<double*> out;
  auto add = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
  };
  auto& e = net.extractor;
  add(e.w1), add(e.b1), add(e.w2), add(e.b2), add(e.w3), add(e.b3);
  if (net.head == sgldl::HeadKind::graph) {
    add(net.gcn.w1), add(net.gcn.w2);
  } else {
    add(net.dense_head);
  }
  return out;
}

inline std::vector<double> flatten(const sgldl::NetworkGradients& g, sgldl::HeadKind head) {
  std::vector<double> out;
  auto add = [&](const auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data()[i]);
  };
  const auto& e = g.extractor;
  add(e.w1), add(e.b1), add(e.w2), add(e.b2), add(e.w3), add(e.b3);
  if (head == sgldl::HeadKind::graph) {
    add(g.gcn.w1), add(g.gcn.w2);
  } else {
    add(g.dense_head);
  }
  return out;
}

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return scale == 0.0 ? 0.0 : std::abs(analytic - numeric) / scale;
}

// Gradients of at least abs_tol / rel_tol are held to the relative tolerance.
// Smaller ones sit below what central differences resolve relatively (loss
// round-off is about eps * |loss| / step) and are held to abs_tol instead.
struct GradientCheck {
  double max_rel_err = 0.0;    // over every parameter, for reference
  double max_rel_large = 0.0;  // over gradients >= abs_tol / rel_tol
  double max_abs_small = 0.0;  // over the rest
  std::size_t checked = 0;
  std::size_t small = 0;
  std::size_t failed = 0;
};

inline GradientCheck check_gradient(sgldl::Network& net, const std::vector<double>& analytic,
                                    const std::function<double(const sgldl::Network&)>& loss, double step = 1e-5,
                                    double rel_tol = 1e-5, double abs_tol = 1e-9) {
  GradientCheck out;
  std::vector<double*> params = parameters(net);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = *params[i];
    *params[i] = saved + step;
    const double up = loss(net);
    *params[i] = saved - step;
    const double down = loss(net);
    *params[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double rel = relative_error(analytic[i], numeric);
    const double abs = std::abs(analytic[i] - numeric);
    out.max_rel_err = std::max(out.max_rel_err, rel);
    if (std::max(std::abs(analytic[i]), std::abs(numeric)) >= abs_tol / rel_tol) {
      out.max_rel_large = std::max(out.max_rel_large, rel);
      if (rel > rel_tol) ++out.failed;
    } else {
      ++out.small;
      out.max_abs_small = std::max(out.max_abs_small, abs);
      if (abs > abs_tol) ++out.failed;
    }
    ++out.checked;
  }
  return out;
}

// Graph-head network at task 2 with `old_count` + `new_count` labels, a random
// non-negative correlation matrix, and its previous-task twin.
struct TaskTwoFixture {
  sgldl::Network current;
  sgldl::Network previous;
  Matrix stored;
  sgldl::Batch batch;
  std::size_t old_count = 0;
};

inline TaskTwoFixture task_two_fixture(std::size_t old_count, std::size_t new_count, std::size_t dim,
                                       std::size_t input_dim, std::size_t batch, std::uint64_t seed) {
  using namespace sgldl;
  Rng rng(seed);
  ModelDims dims;
  dims.input_dim = input_dim;
  dims.embedding_dim = dim;
  dims.hidden_dim = dim;
  dims.feature_dim = dim;

  std::vector<LabelId> old_ids, new_ids;
  for (std::size_t i = 0; i < old_count; ++i) old_ids.push_back(static_cast<LabelId>(i));
  for (std::size_t i = 0; i < new_count; ++i) new_ids.push_back(static_cast<LabelId>(old_count + i));
  const LabelSpace old_space(old_ids), new_space(new_ids);
  const auto o = static_cast<Eigen::Index>(old_count), n = static_cast<Eigen::Index>(new_count);

  TaskTwoFixture f;
  f.old_count = old_count;
  f.previous = Network::fresh(HeadKind::graph, dims, seed);
  f.previous.add_labels(old_space);
  const auto scm1 = ScalableCorrelationMatrix::first(old_space, random_matrix(rng, o, o, 0.0, 1.5));
  f.previous.set_scm(scm1);

  f.current = f.previous;
  f.current.add_labels(new_space);
  f.current.set_scm(ScalableCorrelationMatrix::extend(scm1, new_space, random_matrix(rng, n, n, 0.0, 1.5),
                                                      random_matrix(rng, o, n, 0.0, 1.5),
                                                      random_matrix(rng, n, o, 0.0, 1.5)));
  // Move the current model away from the previous one so DT and RP are not at
  // their minima.
  for (double* p : parameters(f.current)) *p += rng.uniform(-0.2, 0.2);

  f.stored = f.previous.class_embeddings();
  f.batch.inputs = random_matrix(rng, static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(input_dim));
  f.batch.targets = random_rows(rng, static_cast<Eigen::Index>(batch), o + n);
  f.batch.old_outputs = f.previous.predict(f.batch.inputs);
  return f;
}

}  // namespace oracle
