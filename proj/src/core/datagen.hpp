#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "label_distribution.hpp"
#include "util.hpp"

namespace sgldl {

struct StreamConfig {
  std::size_t total_labels = 20;
  std::size_t tasks = 5;
  double sigma = 3.0;
  std::size_t train_per_task = 2000;
  std::size_t test_per_task = 500;
  std::size_t feature_dim = 16;
  double noise = 0.05;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Instance {
  std::vector<double> x;
  LabelId mu = 0;
  std::vector<double> degrees;  // over the split's label space
};

struct TaskData {
  std::size_t index = 0;  // 1-based
  LabelSpace new_labels;
  LabelSpace cumulative_labels;
  std::vector<Instance> train;  // degrees over cumulative_labels
  std::vector<Instance> test;   // centered on new_labels, degrees over the full space
};

struct Stream {
  StreamConfig config;
  LabelSpace full_labels;
  std::vector<TaskData> tasks;

  // Test instances of tasks 1..task (1-based), degrees over the full space.
  std::vector<const Instance*> cumulative_test(std::size_t task) const;
};

// d_j proportional to exp(-(j - mu)^2 / (2 sigma^2)) over the given labels,
// where a label's position is its id.
LabelDistribution gaussian_distribution(double mu, const LabelSpace& labels, double sigma);

// Radial-basis responses of mu at feature_dim centers spanning the label
// range, plus N(0, noise^2) drawn from `rng`.
std::vector<double> gen_feature(LabelId mu, const StreamConfig& config, Rng& rng);

Stream build_stream(const StreamConfig& config);

Matrix inputs_matrix(const std::vector<Instance>& instances);
Matrix targets_matrix(const std::vector<Instance>& instances);

// One JSON record per line; the first line is a header carrying the config.
std::string stream_to_jsonl(const Stream& stream, std::string_view provenance_json = {});
Stream stream_from_jsonl(std::string_view text);

}  // namespace sgldl
