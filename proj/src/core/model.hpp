#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "extractor.hpp"
#include "graph.hpp"
#include "label_distribution.hpp"
#include "scm.hpp"

namespace sgldl {

enum class HeadKind { graph, dense };

struct ModelDims {
  std::size_t input_dim = 16;
  std::size_t extractor_hidden = 64;
  std::size_t embedding_dim = 16;  // d
  std::size_t hidden_dim = 32;     // h
  std::size_t feature_dim = 32;    // D
};

// Everything needed to predict over the current label space. The graph head
// derives its per-label classifier vectors from the correlation matrix; the
// dense head keeps one free weight row per label.
struct Network {
  HeadKind head = HeadKind::graph;
  ModelDims dims;
  std::uint64_t seed = 0;
  LabelSpace labels;
  ExtractorParams extractor;

  // graph head
  GcnParams gcn;
  Matrix node_embeddings;  // fixed H0
  ScalableCorrelationMatrix scm;
  Matrix adjacency;  // normalize_adjacency(scm), kept in sync by set_scm

  // dense head
  Matrix dense_head;  // labels x feature_dim

  static Network fresh(HeadKind head, const ModelDims& dims, std::uint64_t seed);

  void set_scm(ScalableCorrelationMatrix scm);
  // Grow the label space. Graph heads regenerate H0 (old rows unchanged);
  // dense heads append freshly drawn rows.
  void add_labels(const LabelSpace& added);

  // labels x feature_dim classifier vectors.
  Matrix class_embeddings() const;
  // Rows of `inputs` are samples; returns samples x labels probabilities.
  Matrix predict(const Matrix& inputs) const;
  std::size_t head_parameter_count() const;
};

// Training state across the task sequence.
struct ModelState {
  int task_index = 0;  // last completed task, 0 before the first
  Network current;
  // Deep copy of `current` taken when the latest task began (the task t-1
  // model during task t). Absent before the second task.
  std::shared_ptr<const Network> snapshot;
  // Graph embedding stored after the latest task.
  Matrix stored_embedding;
  std::string provenance;  // opaque JSON text from the producing experiment

  static ModelState fresh(HeadKind head, const ModelDims& dims, std::uint64_t seed);
};

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCheckpointFormat = "sgldl-checkpoint";

std::string checkpoint_to_json(const ModelState& state);
ModelState checkpoint_from_json(std::string_view text);
void save_checkpoint(const ModelState& state, const std::filesystem::path& path);
ModelState load_checkpoint(const std::filesystem::path& path);

}  // namespace sgldl
