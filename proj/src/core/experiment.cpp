#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <thread>

#include "json.hpp"

namespace sgldl {

using nlohmann::json;

namespace {

// Reads fields off one JSON object, rejecting missing, mistyped and unknown keys.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(ErrorKind::config, path_ + " must be a JSON object");
  }

  const json& require(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(ErrorKind::config, "missing field '" + field(key) + "'");
    return j_.at(key);
  }

  const json* optional(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return nullptr;
    return &j_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    return convert<T>(require(key), key);
  }

  template <typename T>
  std::optional<T> get_optional(const std::string& key) {
    const json* v = optional(key);
    if (!v) return std::nullopt;
    return convert<T>(*v, key);
  }

  void reject_unknown() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) fail(ErrorKind::config, "unknown key '" + field(key) + "'");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  template <typename T>
  T convert(const json& v, const std::string& key) const {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) fail(ErrorKind::config, "field '" + field(key) + "' must be a number");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        fail(ErrorKind::config, "field '" + field(key) + "' must be a non-negative integer");
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(ErrorKind::config, "field '" + field(key) + "' must be a string");
    }
    return v.get<T>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    fail(ErrorKind::config, std::string("config is not valid JSON: ") + err.what());
  }
  ExperimentConfig cfg;
  ObjectReader top(root, "");

  ObjectReader stream(top.require("stream"), "stream");
  cfg.stream.total_labels = stream.get<std::size_t>("total_labels");
  cfg.stream.tasks = stream.get<std::size_t>("tasks");
  cfg.stream.sigma = stream.get<double>("sigma");
  cfg.stream.train_per_task = stream.get<std::size_t>("train_per_task");
  cfg.stream.test_per_task = stream.get<std::size_t>("test_per_task");
  cfg.stream.feature_dim = stream.get<std::size_t>("feature_dim");
  cfg.stream.noise = stream.get<double>("noise");
  cfg.stream.seed = stream.get<std::uint64_t>("seed");
  stream.reject_unknown();

  ObjectReader train(top.require("train"), "train");
  cfg.train.learning_rate = train.get<double>("learning_rate");
  cfg.train.epochs = train.get<std::size_t>("epochs");
  cfg.train.batch_size = train.get<std::size_t>("batch_size");
  cfg.train.weights.nc = train.get<double>("lambda1");
  cfg.train.weights.dt = train.get<double>("lambda2");
  cfg.train.weights.rp = train.get<double>("lambda3");
  cfg.train.dims.embedding_dim = train.get<std::size_t>("embedding_dim");
  cfg.train.dims.hidden_dim = train.get<std::size_t>("hidden_dim");
  cfg.train.dims.feature_dim = train.get<std::size_t>("feature_dim");
  cfg.train.dims.extractor_hidden = train.get<std::size_t>("extractor_hidden");
  cfg.train.scm_threshold = train.get_optional<double>("scm_threshold");
  cfg.train.grad_clip = train.get_optional<double>("grad_clip");
  train.reject_unknown();

  const json& methods = top.require("methods");
  if (!methods.is_array() || methods.empty()) fail(ErrorKind::config, "field 'methods' must be a non-empty array");
  for (const json& m : methods) {
    if (!m.is_string()) fail(ErrorKind::config, "field 'methods' must hold strings");
    const Method method = parse_method(m.get<std::string>());
    if (std::find(cfg.methods.begin(), cfg.methods.end(), method) != cfg.methods.end()) {
      fail(ErrorKind::config, "method '" + m.get<std::string>() + "' listed twice");
    }
    cfg.methods.push_back(method);
  }
  const json& seeds = top.require("seeds");
  if (!seeds.is_array() || seeds.empty()) fail(ErrorKind::config, "field 'seeds' must be a non-empty array");
  for (const json& s : seeds) {
    if (!s.is_number_unsigned()) fail(ErrorKind::config, "field 'seeds' must hold non-negative integers");
    const auto seed = s.get<std::uint64_t>();
    if (std::find(cfg.seeds.begin(), cfg.seeds.end(), seed) != cfg.seeds.end()) {
      fail(ErrorKind::config, "seed " + std::to_string(seed) + " listed twice");
    }
    cfg.seeds.push_back(seed);
  }
  cfg.output_dir = top.get<std::string>("output_dir");
  cfg.dataset_sha256 = top.get_optional<std::string>("dataset_sha256");
  top.reject_unknown();

  cfg.stream.validate();
  cfg.train.validate();

  json canonical = root;
  canonical.erase("output_dir");
  cfg.hash = sha256_hex(canonical.dump());
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_file(path));
}

std::string provenance_json(const ExperimentConfig& cfg, std::optional<std::uint64_t> seed) {
  json p = {{"artifact_version", kVersion}, {"config_sha256", cfg.hash}};
  if (seed) {
    p["seed"] = *seed;
  } else {
    p["seeds"] = cfg.seeds;
  }
  return p.dump();
}

std::string provenance_comment(const ExperimentConfig& cfg, std::optional<std::uint64_t> seed) {
  return "# provenance " + provenance_json(cfg, seed) + "\n";
}

Dataset generate_dataset(const ExperimentConfig& cfg) {
  Dataset d;
  d.stream = build_stream(cfg.stream);
  d.text = stream_to_jsonl(d.stream, provenance_json(cfg, cfg.stream.seed));
  d.sha256 = sha256_hex(d.text);
  return d;
}

Dataset load_dataset(const std::filesystem::path& path) {
  Dataset d;
  d.text = read_file(path);
  d.stream = stream_from_jsonl(d.text);
  d.sha256 = sha256_hex(d.text);
  return d;
}

bool ExperimentReport::ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return !c.error; });
}

std::string method_slug(Method method) {
  switch (method) {
    case Method::sgldl: return "sgldl";
    case Method::naive: return "naive";
    case Method::without_nc: return "wo_lnc";
    case Method::without_dt: return "wo_ldt";
    case Method::without_rp: return "wo_lrp";
  }
  return "unknown";
}

std::filesystem::path checkpoint_path(const std::filesystem::path& out_dir, Method method, std::uint64_t seed,
                                      std::size_t task) {
  return out_dir / "checkpoints" /
         (method_slug(method) + "_seed" + std::to_string(seed) + "_task" + std::to_string(task) + ".json");
}

ExperimentReport run_cells(const ExperimentConfig& cfg, const Stream& stream, const std::filesystem::path& out_dir,
                           std::size_t workers) {
  if (stream.config.feature_dim == 0 || stream.tasks.empty()) fail(ErrorKind::invalid_argument, "empty stream");
  ExperimentReport report;
  for (Method m : cfg.methods) {
    for (std::uint64_t s : cfg.seeds) {
      CellResult cell;
      cell.method = m;
      cell.seed = s;
      report.cells.push_back(std::move(cell));
    }
  }

  auto run_one = [&](CellResult& cell) {
    TrainConfig train = cfg.train;
    train.seed = cell.seed;
    try {
      auto on_task = [&](const ModelState& state, const MetricRow& row) {
        cell.rows.push_back(row);
        if (!out_dir.empty()) {
          ModelState copy = state;
          copy.provenance = provenance_json(cfg, cell.seed);
          save_checkpoint(copy, checkpoint_path(out_dir, cell.method, cell.seed, row.task_index));
        }
      };
      SequenceResult result = run_sequence(stream, train, cell.method, on_task);
      cell.first_task_after_final = result.first_task_after_final;
      cell.loss_traces = std::move(result.loss_traces);
    } catch (const std::exception& err) {
      cell.error = err.what();
    }
  };

  const std::size_t n_workers = std::clamp<std::size_t>(workers, 1, report.cells.size());
  if (n_workers == 1) {
    for (CellResult& cell : report.cells) run_one(cell);
    return report;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < n_workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < report.cells.size(); i = next++) run_one(report.cells[i]);
    });
  }
  for (std::thread& t : pool) t.join();
  return report;
}

namespace {

std::string metric_fields(const MetricRecord& m) {
  return format_double(m.dis1) + "," + format_double(m.dis2) + "," + format_double(m.sim1) + "," +
         format_double(m.sim2);
}

}  // namespace

std::string metrics_csv(const ExperimentConfig& cfg, const ExperimentReport& report, std::uint64_t seed) {
  std::string out = provenance_comment(cfg, seed);
  out += kMetricsHeader;
  out += "\n";
  for (const CellResult& cell : report.cells) {
    if (cell.seed != seed) continue;
    const std::string name(method_name(cell.method));
    for (const MetricRow& row : cell.rows) {
      out += name + "," + std::to_string(row.task_index) + "," + std::to_string(row.labels_learned) + "," +
             metric_fields(row.metrics) + "," + std::to_string(row.metrics.skipped) + "\n";
    }
    if (cell.error) out += name + ",FAILED,0,nan,nan,nan,nan,0\n";
  }
  return out;
}

std::string table_csv(const ExperimentConfig& cfg, const ExperimentReport& report) {
  const std::size_t per_task = cfg.stream.total_labels / cfg.stream.tasks;
  std::string out = provenance_comment(cfg);
  out += "method";
  for (std::size_t t = 1; t <= cfg.stream.tasks; ++t) out += "," + std::to_string(t * per_task);
  out += "\n";
  for (Method m : cfg.methods) {
    std::vector<double> sums(cfg.stream.tasks, 0.0);
    std::vector<std::size_t> counts(cfg.stream.tasks, 0);
    for (const CellResult& cell : report.cells) {
      if (cell.method != m) continue;
      for (std::size_t t = 0; t < std::min(cell.rows.size(), sums.size()); ++t) {
        sums[t] += cell.rows[t].metrics.dis1;
        ++counts[t];
      }
    }
    out += std::string(method_name(m));
    for (std::size_t t = 0; t < cfg.stream.tasks; ++t) {
      out += counts[t] ? "," + format_double(sums[t] / static_cast<double>(counts[t])) : std::string(",");
    }
    out += "\n";
  }
  return out;
}

std::string forgetting_csv(const ExperimentConfig& cfg, const ExperimentReport& report) {
  std::string out = provenance_comment(cfg);
  out += "method,seed,dis1,dis2,sim1,sim2,skipped_instances\n";
  for (const CellResult& cell : report.cells) {
    if (!cell.first_task_after_final) continue;
    out += std::string(method_name(cell.method)) + "," + std::to_string(cell.seed) + "," +
           metric_fields(*cell.first_task_after_final) + "," +
           std::to_string(cell.first_task_after_final->skipped) + "\n";
  }
  return out;
}

std::string losses_csv(const ExperimentConfig& cfg, const ExperimentReport& report) {
  std::string out = provenance_comment(cfg);
  out += "method,seed,task_index,epoch,loss\n";
  for (const CellResult& cell : report.cells) {
    for (std::size_t t = 0; t < cell.loss_traces.size(); ++t) {
      for (std::size_t e = 0; e < cell.loss_traces[t].size(); ++e) {
        out += std::string(method_name(cell.method)) + "," + std::to_string(cell.seed) + "," + std::to_string(t + 1) +
               "," + std::to_string(e) + "," + format_double(cell.loss_traces[t][e]) + "\n";
      }
    }
  }
  return out;
}

void write_reports(const ExperimentConfig& cfg, const ExperimentReport& report, const std::filesystem::path& out_dir) {
  for (std::uint64_t seed : cfg.seeds) {
    write_file_atomic(out_dir / ("metrics_seed" + std::to_string(seed) + ".csv"), metrics_csv(cfg, report, seed));
  }
  write_file_atomic(out_dir / "table.csv", table_csv(cfg, report));
  write_file_atomic(out_dir / "forgetting.csv", forgetting_csv(cfg, report));
  write_file_atomic(out_dir / "losses.csv", losses_csv(cfg, report));
}

MetricRecord evaluate_checkpoint(const ModelState& state, const Stream& stream, std::size_t task) {
  if (task == 0 || task > stream.tasks.size()) {
    fail(ErrorKind::invalid_argument, "task " + std::to_string(task) + " is not in the dataset");
  }
  if (task > static_cast<std::size_t>(state.task_index)) {
    fail(ErrorKind::invalid_argument, "checkpoint has only learned through task " + std::to_string(state.task_index) +
                                          "; cannot evaluate task " + std::to_string(task) + " labels");
  }
  if (static_cast<Eigen::Index>(stream.config.feature_dim) != state.current.extractor.input_dim()) {
    fail(ErrorKind::shape, "dataset feature dimensionality does not match the checkpoint");
  }
  return evaluate(state.current, stream.cumulative_test(task), stream.full_labels,
                  stream.tasks[task - 1].cumulative_labels);
}

}  // namespace sgldl
