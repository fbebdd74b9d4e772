#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "datagen.hpp"
#include "trainer.hpp"

namespace sgldl {

// A whole experiment, read from one JSON document. Every key is required
// except train.scm_threshold, train.grad_clip and dataset_sha256; unknown keys
// are rejected.
struct ExperimentConfig {
  StreamConfig stream;
  TrainConfig train;
  std::vector<Method> methods;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
  std::optional<std::string> dataset_sha256;

  // sha256 of the canonical JSON without output_dir, so relocating the
  // outputs does not change provenance.
  std::string hash;
};

ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// {"artifact_version", "config_sha256", "seed" or "seeds"} as compact JSON.
std::string provenance_json(const ExperimentConfig& cfg, std::optional<std::uint64_t> seed = std::nullopt);
// The same, as a leading `# provenance {...}` line for CSV outputs.
std::string provenance_comment(const ExperimentConfig& cfg, std::optional<std::uint64_t> seed = std::nullopt);

struct Dataset {
  Stream stream;
  std::string text;  // JSON-lines serialization
  std::string sha256;
};

Dataset generate_dataset(const ExperimentConfig& cfg);
Dataset load_dataset(const std::filesystem::path& path);

struct CellResult {
  Method method = Method::sgldl;
  std::uint64_t seed = 0;
  std::vector<MetricRow> rows;
  std::optional<MetricRecord> first_task_after_final;
  std::vector<std::vector<double>> loss_traces;
  std::optional<std::string> error;
};

struct ExperimentReport {
  std::vector<CellResult> cells;  // methods-major, then seeds, in config order
  bool ok() const;
};

// Runs every (method, seed) cell, up to `workers` at a time. Checkpoints go
// to <out_dir>/checkpoints when `out_dir` is non-empty.
ExperimentReport run_cells(const ExperimentConfig& cfg, const Stream& stream, const std::filesystem::path& out_dir,
                           std::size_t workers);

inline constexpr const char* kMetricsHeader =
    "method,task_index,labels_learned,dis1,dis2,sim1,sim2,skipped_instances";

std::string metrics_csv(const ExperimentConfig& cfg, const ExperimentReport& report, std::uint64_t seed);
// One row per method (mean over seeds),
// one Euclidean-distance column per cumulative label count.
std::string table_csv(const ExperimentConfig& cfg, const ExperimentReport& report);
// Task-1 test split scored on task-1 labels by each final model.
std::string forgetting_csv(const ExperimentConfig& cfg, const ExperimentReport& report);
std::string losses_csv(const ExperimentConfig& cfg, const ExperimentReport& report);

// Writes metrics_seed<N>.csv, table.csv, forgetting.csv, losses.csv.
void write_reports(const ExperimentConfig& cfg, const ExperimentReport& report, const std::filesystem::path& out_dir);

std::string method_slug(Method method);
std::filesystem::path checkpoint_path(const std::filesystem::path& out_dir, Method method, std::uint64_t seed,
                                      std::size_t task);

// Metrics of a checkpoint on the cumulative test set of `task`, restricted
// to that task's cumulative labels.
MetricRecord evaluate_checkpoint(const ModelState& state, const Stream& stream, std::size_t task);

}  // namespace sgldl
