#include "trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace sgldl {

std::string_view method_name(Method method) {
  switch (method) {
    case Method::sgldl: return "sgldl";
    case Method::naive: return "naive";
    case Method::without_nc: return "w/oLNC";
    case Method::without_dt: return "w/oLDT";
    case Method::without_rp: return "w/oLRP";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::sgldl, Method::naive, Method::without_nc, Method::without_dt, Method::without_rp}) {
    if (method_name(m) == name) return m;
  }
  fail(ErrorKind::config, "unknown method '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail(ErrorKind::config, "train.learning_rate must be > 0");
  if (batch_size == 0) fail(ErrorKind::config, "train.batch_size must be >= 1");
  for (double w : {weights.nc, weights.dt, weights.rp}) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorKind::config, "train.lambda weights must be finite and >= 0");
  }
  if (scm_threshold && !(*scm_threshold >= 0.0)) fail(ErrorKind::config, "train.scm_threshold must be >= 0");
  if (grad_clip && !(*grad_clip > 0.0)) fail(ErrorKind::config, "train.grad_clip must be > 0");
  if (dims.embedding_dim == 0 || dims.hidden_dim == 0 || dims.feature_dim == 0 || dims.extractor_hidden == 0) {
    fail(ErrorKind::config, "train dimensions must be >= 1");
  }
}

ObjectiveOptions objective_options(Method method, const TrainConfig& cfg, std::size_t first_new) {
  ObjectiveOptions o;
  o.weights = cfg.weights;
  o.first_new = first_new;
  switch (method) {
    case Method::sgldl: break;
    case Method::without_nc: o.compensate = false; break;
    case Method::without_dt: o.weights.dt = 0.0; break;
    case Method::without_rp: o.weights.rp = 0.0; break;
    case Method::naive:
      o.compensate = false;
      o.weights = LossWeights{1.0, 0.0, 0.0};
      break;
  }
  return o;
}

ModelState initial_state(Method method, const TrainConfig& cfg, std::size_t input_dim) {
  ModelDims dims = cfg.dims;
  dims.input_dim = input_dim;
  return ModelState::fresh(method == Method::naive ? HeadKind::dense : HeadKind::graph, dims, cfg.seed);
}

namespace {

Matrix take_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

double squared_norm(const NetworkGradients& g) {
  const auto& e = g.extractor;
  double s = e.w1.squaredNorm() + e.b1.squaredNorm() + e.w2.squaredNorm() + e.b2.squaredNorm() +
             e.w3.squaredNorm() + e.b3.squaredNorm();
  s += g.gcn.w1.squaredNorm() + g.gcn.w2.squaredNorm() + g.dense_head.squaredNorm();
  return s;
}

void sgd_step(Network& net, const NetworkGradients& g, double step) {
  auto& e = net.extractor;
  e.w1 -= step * g.extractor.w1;
  e.b1 -= step * g.extractor.b1;
  e.w2 -= step * g.extractor.w2;
  e.b2 -= step * g.extractor.b2;
  e.w3 -= step * g.extractor.w3;
  e.b3 -= step * g.extractor.b3;
  if (net.head == HeadKind::graph) {
    net.gcn.w1 -= step * g.gcn.w1;
    net.gcn.w2 -= step * g.gcn.w2;
  } else {
    net.dense_head -= step * g.dense_head;
  }
}

void extend_correlation_matrix(Network& net, const TaskData& task, const Matrix& targets, const Matrix& old_outputs,
                               const TrainConfig& cfg) {
  const std::size_t old_count = net.labels.size();
  Matrix m = compute_m(targets, old_count).values;
  if (cfg.scm_threshold) apply_threshold(m, *cfg.scm_threshold);
  ScalableCorrelationMatrix scm;
  if (old_count == 0) {
    scm = ScalableCorrelationMatrix::first(task.new_labels, std::move(m));
  } else {
    Matrix e = compute_e(targets, old_outputs, old_count).values;
    Matrix r = compute_r(targets, old_outputs, old_count).values;
    if (cfg.scm_threshold) {
      apply_threshold(e, *cfg.scm_threshold);
      apply_threshold(r, *cfg.scm_threshold);
    }
    scm = ScalableCorrelationMatrix::extend(net.scm, task.new_labels, m, e, r);
  }
  net.add_labels(task.new_labels);
  net.set_scm(std::move(scm));
}

}  // namespace

TaskTrace run_task(ModelState& state, const TaskData& task, const TrainConfig& cfg, Method method) {
  cfg.validate();
  if (static_cast<std::size_t>(state.task_index) + 1 != task.index) {
    fail(ErrorKind::state, "run_task: model is at task " + std::to_string(state.task_index) + ", cannot train task " +
                               std::to_string(task.index));
  }
  if (!state.current.labels.is_prefix_of(task.cumulative_labels) ||
      state.current.labels.extended(task.new_labels) != task.cumulative_labels) {
    fail(ErrorKind::state, "run_task: task label spaces do not continue the model's label space");
  }
  if (task.train.empty()) fail(ErrorKind::invalid_argument, "run_task: task has no training data");

  const std::size_t old_count = state.current.labels.size();
  const Matrix inputs = inputs_matrix(task.train);
  const Matrix targets = targets_matrix(task.train);
  if (targets.cols() != static_cast<Eigen::Index>(task.cumulative_labels.size())) {
    fail(ErrorKind::shape, "run_task: training targets must span the cumulative label space");
  }

  // (1) freeze the previous model; (2) query it once on the training data
  Matrix old_outputs;
  if (old_count > 0) {
    state.snapshot = std::make_shared<const Network>(state.current);
    old_outputs = state.snapshot->predict(inputs);
  }

  // (3) correlation matrix, (4) node embeddings / head rows
  if (state.current.head == HeadKind::graph) {
    extend_correlation_matrix(state.current, task, targets, old_outputs, cfg);
  } else {
    state.current.add_labels(task.new_labels);
  }

  // (5) mini-batch SGD
  const ObjectiveOptions options = objective_options(method, cfg, old_count);
  const Matrix* stored = old_count > 0 ? &state.stored_embedding : nullptr;
  TaskTrace trace;
  const std::size_t n = task.train.size();
  std::vector<std::size_t> order(n);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle(derive_seed({cfg.seed, 0x73687566 /* "shuf" */, task.index, epoch}));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle.index(i)]);

    double epoch_total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::span<const std::size_t> rows(order.data() + start, std::min(cfg.batch_size, n - start));
      Batch batch{take_rows(inputs, rows), take_rows(targets, rows), Matrix()};
      if (old_count > 0) batch.old_outputs = take_rows(old_outputs, rows);

      const ObjectiveResult result = total_loss(state.current, batch, state.snapshot.get(), stored, options);
      const double grad_norm2 = squared_norm(result.grad);
      if (!std::isfinite(result.total) || !std::isfinite(grad_norm2)) {
        std::ostringstream msg;
        msg << "non-finite loss at task " << task.index << " epoch " << epoch << " batch " << batches
            << " (instances";
        for (std::size_t r : rows) msg << ' ' << r;
        msg << ")";
        fail(ErrorKind::numeric, msg.str());
      }
      double step = cfg.learning_rate;
      if (cfg.grad_clip && grad_norm2 > *cfg.grad_clip * *cfg.grad_clip) {
        step *= *cfg.grad_clip / std::sqrt(grad_norm2);
      }
      sgd_step(state.current, result.grad, step);
      epoch_total += result.total;
      ++batches;
    }
    trace.epoch_losses.push_back(epoch_total / static_cast<double>(batches));
  }

  // (6) store the learned graph embedding
  state.stored_embedding = state.current.class_embeddings();
  state.task_index = static_cast<int>(task.index);
  return trace;
}

MetricRecord evaluate(const Network& net, const std::vector<const Instance*>& test, const LabelSpace& truth_space,
                      const LabelSpace& learned) {
  if (learned.empty()) fail(ErrorKind::invalid_argument, "evaluate: empty learned label set");
  std::vector<Eigen::Index> columns;
  for (LabelId id : learned.ids()) {
    auto idx = net.labels.index_of(id);
    if (!idx) fail(ErrorKind::invalid_argument, "evaluate: label " + std::to_string(id) + " has not been learned");
    columns.push_back(static_cast<Eigen::Index>(*idx));
  }

  std::vector<const Instance*> kept;
  std::vector<LabelDistribution> truths;
  MetricRecord rec;
  for (const Instance* inst : test) {
    try {
      truths.push_back(restrict_and_renormalize(LabelDistribution(inst->degrees), truth_space, learned));
      kept.push_back(inst);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::degenerate) throw;
      ++rec.skipped;
    }
  }
  if (kept.empty()) fail(ErrorKind::invalid_argument, "evaluate: no test instance has mass on the learned labels");

  Matrix inputs(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(kept.front()->x.size()));
  for (std::size_t i = 0; i < kept.size(); ++i)
    for (std::size_t c = 0; c < kept[i]->x.size(); ++c)
      inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = kept[i]->x[c];
  const Matrix predicted = net.predict(inputs);

  std::vector<double> pred(columns.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    double mass = 0.0;
    for (std::size_t j = 0; j < columns.size(); ++j) {
      pred[j] = predicted(static_cast<Eigen::Index>(i), columns[j]);
      mass += pred[j];
    }
    for (double& v : pred) v /= mass;
    const auto truth = truths[i].degrees();
    rec.dis1 += euclidean_distance(truth, pred);
    rec.dis2 += kl_divergence(truth, pred);
    rec.sim1 += intersection(truth, pred);
    rec.sim2 += fidelity(truth, pred);
  }
  const double n = static_cast<double>(kept.size());
  rec.dis1 /= n;
  rec.dis2 /= n;
  rec.sim1 /= n;
  rec.sim2 /= n;
  rec.evaluated = kept.size();
  return rec;
}

SequenceResult run_sequence(const Stream& stream, const TrainConfig& cfg, Method method, const TaskCallback& on_task) {
  if (stream.tasks.empty()) fail(ErrorKind::invalid_argument, "run_sequence: empty stream");
  SequenceResult out;
  out.final_state = initial_state(method, cfg, stream.config.feature_dim);
  for (const TaskData& task : stream.tasks) {
    TaskTrace trace = run_task(out.final_state, task, cfg, method);
    out.loss_traces.push_back(std::move(trace.epoch_losses));
    MetricRow row;
    row.method = method;
    row.seed = cfg.seed;
    row.task_index = task.index;
    row.labels_learned = task.cumulative_labels.size();
    row.metrics = evaluate(out.final_state.current, stream.cumulative_test(task.index), stream.full_labels,
                           task.cumulative_labels);
    out.rows.push_back(row);
    if (on_task) on_task(out.final_state, row);
  }
  out.first_task_after_final = evaluate(out.final_state.current, stream.cumulative_test(1), stream.full_labels,
                                        stream.tasks.front().cumulative_labels);
  return out;
}

SequenceResult run_naive_baseline(const Stream& stream, const TrainConfig& cfg, const TaskCallback& on_task) {
  return run_sequence(stream, cfg, Method::naive, on_task);
}

SequenceResult run_ablation(std::string_view which, const Stream& stream, const TrainConfig& cfg,
                            const TaskCallback& on_task) {
  const Method method = parse_method(which);
  if (method != Method::without_nc && method != Method::without_dt && method != Method::without_rp) {
    fail(ErrorKind::config, "'" + std::string(which) + "' is not an ablation variant");
  }
  return run_sequence(stream, cfg, method, on_task);
}

}  // namespace sgldl
