#include "datagen.hpp"

#include <cmath>

#include "json.hpp"

namespace sgldl {

using nlohmann::json;

namespace {
constexpr std::uint64_t kTrainSplit = 1;
constexpr std::uint64_t kTestSplit = 2;
constexpr const char* kStreamFormat = "sgldl-stream";
constexpr int kStreamVersion = 1;
}  // namespace

void StreamConfig::validate() const {
  if (total_labels == 0) fail(ErrorKind::config, "stream.total_labels must be >= 1");
  if (tasks == 0) fail(ErrorKind::config, "stream.tasks must be >= 1");
  if (total_labels % tasks != 0) {
    fail(ErrorKind::config, "stream.total_labels (" + std::to_string(total_labels) +
                                ") must be divisible by stream.tasks (" + std::to_string(tasks) + ")");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(ErrorKind::config, "stream.sigma must be > 0");
  if (train_per_task == 0) fail(ErrorKind::config, "stream.train_per_task must be >= 1");
  if (test_per_task == 0) fail(ErrorKind::config, "stream.test_per_task must be >= 1");
  if (feature_dim == 0) fail(ErrorKind::config, "stream.feature_dim must be >= 1");
  if (!(noise >= 0.0) || !std::isfinite(noise)) fail(ErrorKind::config, "stream.noise must be >= 0");
}

std::vector<const Instance*> Stream::cumulative_test(std::size_t task) const {
  if (task == 0 || task > tasks.size()) fail(ErrorKind::invalid_argument, "no task " + std::to_string(task));
  std::vector<const Instance*> out;
  for (std::size_t t = 0; t < task; ++t)
    for (const Instance& inst : tasks[t].test) out.push_back(&inst);
  return out;
}

LabelDistribution gaussian_distribution(double mu, const LabelSpace& labels, double sigma) {
  if (labels.empty()) fail(ErrorKind::invalid_argument, "gaussian_distribution: empty label space");
  if (!(sigma > 0.0)) fail(ErrorKind::invalid_argument, "gaussian_distribution: sigma must be > 0");
  std::vector<double> d(labels.size());
  double total = 0.0;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const double offset = static_cast<double>(labels[j]) - mu;
    d[j] = std::exp(-offset * offset / (2.0 * sigma * sigma));
    total += d[j];
  }
  if (!(total > 0.0)) fail(ErrorKind::numeric, "gaussian_distribution: all mass underflowed");
  for (double& v : d) v /= total;
  return LabelDistribution(std::move(d));
}

std::vector<double> gen_feature(LabelId mu, const StreamConfig& config, Rng& rng) {
  const std::size_t n = config.feature_dim;
  const double span = static_cast<double>(config.total_labels - 1);
  const double spacing = n > 1 ? span / static_cast<double>(n - 1) : std::max(span, 1.0);
  const double width = std::max(spacing, 1.0);
  std::vector<double> x(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double center = n > 1 ? spacing * static_cast<double>(r) : span / 2.0;
    const double offset = static_cast<double>(mu) - center;
    x[r] = std::exp(-offset * offset / (2.0 * width * width));
    if (config.noise > 0.0) x[r] += config.noise * rng.normal();
  }
  return x;
}

namespace {

Instance draw_instance(const StreamConfig& config, const LabelSpace& centers, const LabelSpace& target_space,
                       std::uint64_t task, std::uint64_t split, std::uint64_t index) {
  Rng rng(derive_seed({config.seed, task, split, index}));
  Instance inst;
  inst.mu = centers[rng.index(centers.size())];
  inst.x = gen_feature(inst.mu, config, rng);
  inst.degrees = gaussian_distribution(inst.mu, target_space, config.sigma).values();
  return inst;
}

// Label spaces for every task, with no instances drawn yet.
Stream stream_layout(const StreamConfig& config) {
  config.validate();
  Stream stream;
  stream.config = config;
  std::vector<LabelId> all(config.total_labels);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<LabelId>(i);
  stream.full_labels = LabelSpace(all);

  const std::size_t per_task = config.total_labels / config.tasks;
  LabelSpace cumulative;
  for (std::size_t t = 1; t <= config.tasks; ++t) {
    TaskData task;
    task.index = t;
    task.new_labels = LabelSpace(std::vector<LabelId>(all.begin() + static_cast<std::ptrdiff_t>((t - 1) * per_task),
                                                      all.begin() + static_cast<std::ptrdiff_t>(t * per_task)));
    cumulative = cumulative.extended(task.new_labels);
    task.cumulative_labels = cumulative;
    stream.tasks.push_back(std::move(task));
  }
  return stream;
}

}  // namespace

Stream build_stream(const StreamConfig& config) {
  Stream stream = stream_layout(config);
  for (TaskData& task : stream.tasks) {
    const auto t = static_cast<std::uint64_t>(task.index);
    task.train.reserve(config.train_per_task);
    for (std::size_t i = 0; i < config.train_per_task; ++i) {
      task.train.push_back(draw_instance(config, task.cumulative_labels, task.cumulative_labels, t, kTrainSplit, i));
    }
    task.test.reserve(config.test_per_task);
    for (std::size_t i = 0; i < config.test_per_task; ++i) {
      task.test.push_back(draw_instance(config, task.new_labels, stream.full_labels, t, kTestSplit, i));
    }
  }
  return stream;
}

Matrix inputs_matrix(const std::vector<Instance>& instances) {
  if (instances.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(instances.size()), static_cast<Eigen::Index>(instances.front().x.size()));
  for (std::size_t i = 0; i < instances.size(); ++i)
    for (std::size_t c = 0; c < instances[i].x.size(); ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = instances[i].x[c];
  return m;
}

Matrix targets_matrix(const std::vector<Instance>& instances) {
  if (instances.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(instances.size()),
           static_cast<Eigen::Index>(instances.front().degrees.size()));
  for (std::size_t i = 0; i < instances.size(); ++i)
    for (std::size_t c = 0; c < instances[i].degrees.size(); ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = instances[i].degrees[c];
  return m;
}

namespace {

json config_to_json(const StreamConfig& c) {
  return {{"total_labels", c.total_labels}, {"tasks", c.tasks},
          {"sigma", c.sigma},               {"train_per_task", c.train_per_task},
          {"test_per_task", c.test_per_task}, {"feature_dim", c.feature_dim},
          {"noise", c.noise},               {"seed", c.seed}};
}

StreamConfig config_from_json(const json& j) {
  StreamConfig c;
  c.total_labels = j.at("total_labels").get<std::size_t>();
  c.tasks = j.at("tasks").get<std::size_t>();
  c.sigma = j.at("sigma").get<double>();
  c.train_per_task = j.at("train_per_task").get<std::size_t>();
  c.test_per_task = j.at("test_per_task").get<std::size_t>();
  c.feature_dim = j.at("feature_dim").get<std::size_t>();
  c.noise = j.at("noise").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

void append_record(std::string& out, std::size_t task, const char* split, const Instance& inst) {
  json rec = {{"task", task}, {"split", split}, {"mu", inst.mu}, {"features", inst.x}, {"degrees", inst.degrees}};
  out += rec.dump();
  out += '\n';
}

}  // namespace

std::string stream_to_jsonl(const Stream& stream, std::string_view provenance_json) {
  json header = {{"kind", "header"},
                 {"format", kStreamFormat},
                 {"version", kStreamVersion},
                 {"artifact_version", kVersion},
                 {"config", config_to_json(stream.config)}};
  if (!provenance_json.empty()) header["provenance"] = json::parse(provenance_json);
  std::string out = header.dump() + "\n";
  for (const TaskData& task : stream.tasks) {
    for (const Instance& inst : task.train) append_record(out, task.index, "train", inst);
    for (const Instance& inst : task.test) append_record(out, task.index, "test", inst);
  }
  return out;
}

Stream stream_from_jsonl(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto next_line = [&]() -> std::optional<std::string_view> {
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (!line.empty()) return line;
    }
    return std::nullopt;
  };
  auto where = [&] { return "dataset line " + std::to_string(line_no) + ": "; };

  try {
    auto first = next_line();
    if (!first) fail(ErrorKind::parse, "dataset: empty file");
    const json header = json::parse(*first);
    if (header.value("kind", "") != "header" || header.value("format", "") != kStreamFormat) {
      fail(ErrorKind::parse, where() + "missing stream header");
    }
    if (header.at("version").get<int>() != kStreamVersion) fail(ErrorKind::parse, where() + "unsupported version");
    Stream skeleton = stream_layout(config_from_json(header.at("config")));

    while (auto line = next_line()) {
      const json rec = json::parse(*line);
      const auto task = rec.at("task").get<std::size_t>();
      if (task == 0 || task > skeleton.tasks.size()) fail(ErrorKind::parse, where() + "task index out of range");
      TaskData& t = skeleton.tasks[task - 1];
      const auto split = rec.at("split").get<std::string>();
      Instance inst;
      inst.mu = rec.at("mu").get<LabelId>();
      inst.x = rec.at("features").get<std::vector<double>>();
      inst.degrees = rec.at("degrees").get<std::vector<double>>();
      if (inst.x.size() != skeleton.config.feature_dim) fail(ErrorKind::parse, where() + "feature length mismatch");
      const LabelSpace& space = split == "train" ? t.cumulative_labels : skeleton.full_labels;
      if (inst.degrees.size() != space.size()) fail(ErrorKind::parse, where() + "degree vector length mismatch");
      LabelDistribution check(inst.degrees);
      (void)check;
      if (split == "train") {
        t.train.push_back(std::move(inst));
      } else if (split == "test") {
        t.test.push_back(std::move(inst));
      } else {
        fail(ErrorKind::parse, where() + "unknown split '" + split + "'");
      }
    }
    for (const TaskData& t : skeleton.tasks) {
      if (t.train.size() != skeleton.config.train_per_task || t.test.size() != skeleton.config.test_per_task) {
        fail(ErrorKind::parse, "dataset: task " + std::to_string(t.index) + " record count does not match header");
      }
    }
    return skeleton;
  } catch (const json::exception& err) {
    fail(ErrorKind::parse, where() + err.what());
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::parse) throw;
    fail(ErrorKind::parse, where() + err.what());
  }
}

}  // namespace sgldl
