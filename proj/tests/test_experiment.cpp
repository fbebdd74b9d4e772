#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "experiment.hpp"
#include "json.hpp"

using namespace sgldl;
using nlohmann::json;

namespace {

json small_config() {
  return json::parse(R"({
    "stream": {"total_labels": 6, "tasks": 3, "sigma": 3.0, "train_per_task": 40,
               "test_per_task": 10, "feature_dim": 5, "noise": 0.05, "seed": 4},
    "train": {"learning_rate": 0.05, "epochs": 2, "batch_size": 16, "lambda1": 1.0,
              "lambda2": 1.0, "lambda3": 1.0, "embedding_dim": 4, "hidden_dim": 6,
              "feature_dim": 5, "extractor_hidden": 8},
    "methods": ["sgldl", "naive"],
    "seeds": [1, 2],
    "output_dir": "out"
  })");
}

std::string config_error(const json& j) {
  try {
    parse_experiment_config(j.dump());
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
    return e.what();
  }
  return "";
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("sgldl_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parses every field") {
  json j = small_config();
  j["train"]["grad_clip"] = 5.0;
  const auto cfg = parse_experiment_config(j.dump());
  CHECK(cfg.stream.total_labels == 6);
  CHECK(cfg.stream.seed == 4);
  CHECK(cfg.train.epochs == 2);
  CHECK(cfg.train.dims.extractor_hidden == 8);
  CHECK(cfg.train.grad_clip == 5.0);
  CHECK_FALSE(cfg.train.scm_threshold.has_value());
  CHECK(cfg.methods == std::vector<Method>{Method::sgldl, Method::naive});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(cfg.hash.size() == 64);
}

TEST_CASE("config errors name the offending field") {
  json j = small_config();
  j["stream"].erase("sigma");
  CHECK(config_error(j) == "missing field 'stream.sigma'");

  j = small_config();
  j["train"]["momentum"] = 0.9;
  CHECK(config_error(j) == "unknown key 'train.momentum'");

  j = small_config();
  j["extra"] = 1;
  CHECK(config_error(j) == "unknown key 'extra'");

  j = small_config();
  j["train"]["epochs"] = -1;
  CHECK(config_error(j).find("train.epochs") != std::string::npos);

  j = small_config();
  j["stream"]["sigma"] = "wide";
  CHECK(config_error(j).find("stream.sigma") != std::string::npos);

  j = small_config();
  j["methods"] = json::array({"sgldl", "sgldl"});
  CHECK_FALSE(config_error(j).empty());

  j = small_config();
  j["methods"] = json::array({"bogus"});
  CHECK_FALSE(config_error(j).empty());

  j = small_config();
  j["seeds"] = json::array();
  CHECK_FALSE(config_error(j).empty());

  j = small_config();
  j["stream"]["tasks"] = 7;
  CHECK_FALSE(config_error(j).empty());

  CHECK_THROWS_AS(parse_experiment_config("{not json"), Error);
}

TEST_CASE("config hash ignores output_dir and formatting") {
  json a = small_config(), b = small_config();
  b["output_dir"] = "elsewhere";
  CHECK(parse_experiment_config(a.dump()).hash == parse_experiment_config(b.dump(4)).hash);
  b["train"]["epochs"] = 3;
  CHECK(parse_experiment_config(a.dump()).hash != parse_experiment_config(b.dump()).hash);
}

TEST_CASE("provenance") {
  const auto cfg = parse_experiment_config(small_config().dump());
  const json one = json::parse(provenance_json(cfg, 2));
  CHECK(one["config_sha256"] == cfg.hash);
  CHECK(one["seed"] == 2);
  CHECK(one.contains("artifact_version"));
  CHECK(json::parse(provenance_json(cfg))["seeds"] == json::array({1, 2}));
  CHECK(provenance_comment(cfg, 1).rfind("# provenance {", 0) == 0);
}

TEST_CASE("dataset generation is reproducible and loads back") {
  const auto cfg = parse_experiment_config(small_config().dump());
  const Dataset a = generate_dataset(cfg), b = generate_dataset(cfg);
  CHECK(a.sha256 == b.sha256);
  CHECK(a.text == b.text);
  const auto dir = scratch("dataset");
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "d.jsonl", a.text);
  const Dataset back = load_dataset(dir / "d.jsonl");
  CHECK(back.sha256 == a.sha256);
  CHECK(back.stream.tasks.size() == 3);
  CHECK_THROWS_AS(load_dataset(dir / "missing.jsonl"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("reports have the documented layout and do not depend on workers") {
  const auto cfg = parse_experiment_config(small_config().dump());
  const Dataset data = generate_dataset(cfg);
  const auto dir = scratch("run");
  const ExperimentReport serial = run_cells(cfg, data.stream, dir, 1);
  const ExperimentReport parallel = run_cells(cfg, data.stream, {}, 4);
  REQUIRE(serial.ok());
  REQUIRE(serial.cells.size() == 4);
  CHECK(serial.cells[1].method == Method::sgldl);
  CHECK(serial.cells[1].seed == 2);
  CHECK(serial.cells[2].method == Method::naive);
  for (std::uint64_t seed : cfg.seeds) CHECK(metrics_csv(cfg, serial, seed) == metrics_csv(cfg, parallel, seed));
  CHECK(forgetting_csv(cfg, serial) == forgetting_csv(cfg, parallel));

  const auto metrics = lines_of(metrics_csv(cfg, serial, 1));
  REQUIRE(metrics.size() == 2 + 2 * 3);
  CHECK(metrics[0].rfind("# provenance ", 0) == 0);
  CHECK(metrics[1] == kMetricsHeader);
  CHECK(metrics[2].rfind("sgldl,1,2,", 0) == 0);
  CHECK(metrics[4].rfind("sgldl,3,6,", 0) == 0);
  CHECK(metrics[5].rfind("naive,1,2,", 0) == 0);

  const auto table = lines_of(table_csv(cfg, serial));
  CHECK(table[1] == "method,2,4,6");
  CHECK(table.size() == 4);
  CHECK(lines_of(forgetting_csv(cfg, serial))[1] == "method,seed,dis1,dis2,sim1,sim2,skipped_instances");
  const auto losses = lines_of(losses_csv(cfg, serial));
  CHECK(losses[1] == "method,seed,task_index,epoch,loss");
  CHECK(losses.size() == 2 + 4 * 3 * 2);

  write_reports(cfg, serial, dir);
  for (const char* name : {"metrics_seed1.csv", "metrics_seed2.csv", "table.csv", "forgetting.csv", "losses.csv"})
    CHECK(std::filesystem::exists(dir / name));
  const auto ckpt = checkpoint_path(dir, Method::naive, 2, 3);
  CHECK(ckpt.filename() == "naive_seed2_task3.json");
  REQUIRE(std::filesystem::exists(ckpt));

  const ModelState state = load_checkpoint(checkpoint_path(dir, Method::sgldl, 1, 3));
  CHECK(json::parse(state.provenance)["seed"] == 1);
  const MetricRecord m = evaluate_checkpoint(state, data.stream, 3);
  CHECK(m.dis1 == serial.cells[0].rows[2].metrics.dis1);
  CHECK(metrics[4].find(format_double(m.dis1)) != std::string::npos);
  CHECK_NOTHROW(evaluate_checkpoint(state, data.stream, 1));
  CHECK_THROWS_AS(evaluate_checkpoint(load_checkpoint(checkpoint_path(dir, Method::sgldl, 1, 1)), data.stream, 2),
                  Error);
  CHECK_THROWS_AS(evaluate_checkpoint(state, data.stream, 4), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("a failing cell is reported without stopping the others") {
  json j = small_config();
  j["train"]["learning_rate"] = 1e300;
  const auto cfg = parse_experiment_config(j.dump());
  const Dataset data = generate_dataset(cfg);
  const ExperimentReport report = run_cells(cfg, data.stream, {}, 2);
  CHECK_FALSE(report.ok());
  bool failed = false;
  for (const CellResult& cell : report.cells) failed = failed || cell.error.has_value();
  CHECK(failed);
  const std::string csv = metrics_csv(cfg, report, 1);
  CHECK(csv.find(",FAILED,0,nan,nan,nan,nan,0") != std::string::npos);
}

TEST_CASE("method slugs") {
  CHECK(method_slug(Method::sgldl) == "sgldl");
  CHECK(method_slug(Method::without_nc) == "wo_lnc");
  CHECK(method_slug(Method::without_dt) == "wo_ldt");
  CHECK(method_slug(Method::without_rp) == "wo_lrp");
}
