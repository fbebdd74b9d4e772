#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "datagen.hpp"
#include "model.hpp"
#include "objective.hpp"

namespace sgldl {

enum class Method { sgldl, naive, without_nc, without_dt, without_rp };

std::string_view method_name(Method method);
// Accepts the names produced by method_name; anything else is a config error.
Method parse_method(std::string_view name);

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  LossWeights weights;
  std::uint64_t seed = 1;
  std::optional<double> scm_threshold;  // off by default
  std::optional<double> grad_clip;      // global-norm clip, off by default
  ModelDims dims;                       // input_dim is taken from the stream

  void validate() const;
};

// Loss options for one method at a task whose first new label is `first_new`.
ObjectiveOptions objective_options(Method method, const TrainConfig& cfg, std::size_t first_new);

ModelState initial_state(Method method, const TrainConfig& cfg, std::size_t input_dim);

struct TaskTrace {
  std::vector<double> epoch_losses;
};

// One incremental step: snapshot the previous model, query it on the task's
// training data, grow the correlation matrix and node embeddings, run SGD,
// then store the graph embedding. Throws ErrorKind::numeric (with the
// offending batch) if the loss goes non-finite.
TaskTrace run_task(ModelState& state, const TaskData& task, const TrainConfig& cfg, Method method);

struct MetricRecord {
  double dis1 = 0.0;  // Euclidean
  double dis2 = 0.0;  // KL
  double sim1 = 0.0;  // intersection
  double sim2 = 0.0;  // fidelity
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

// Truth is restricted to `learned` and renormalized; so is the prediction
// when the model knows more labels than `learned`. Instances whose truth has
// no mass on `learned` are skipped and counted.
MetricRecord evaluate(const Network& net, const std::vector<const Instance*>& test, const LabelSpace& truth_space,
                      const LabelSpace& learned);

struct MetricRow {
  Method method = Method::sgldl;
  std::uint64_t seed = 0;
  std::size_t task_index = 0;
  std::size_t labels_learned = 0;
  MetricRecord metrics;
};

struct SequenceResult {
  std::vector<MetricRow> rows;  // one per task, cumulative test set
  MetricRecord first_task_after_final;  // task-1 test split, task-1 labels, final model
  std::vector<std::vector<double>> loss_traces;
  ModelState final_state;
};

// Called after each task with the trained state and its evaluation row.
using TaskCallback = std::function<void(const ModelState&, const MetricRow&)>;

SequenceResult run_sequence(const Stream& stream, const TrainConfig& cfg, Method method,
                            const TaskCallback& on_task = {});
SequenceResult run_naive_baseline(const Stream& stream, const TrainConfig& cfg, const TaskCallback& on_task = {});
// `which` is one of w/oLNC, w/oLDT, w/oLRP.
SequenceResult run_ablation(std::string_view which, const Stream& stream, const TrainConfig& cfg,
                            const TaskCallback& on_task = {});

}  // namespace sgldl
