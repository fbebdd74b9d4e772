#include <charconv>
#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "sgldl/sgldl.h"

namespace {

int report(sgldl_status status) {
  if (status == SGLDL_OK) return 0;
  std::string message = sgldl_last_error();
  for (char& ch : message)
    if (ch == '\n') ch = ' ';
  std::fprintf(stderr, "error: code=%s message=%s\n", sgldl_status_string(status), message.c_str());
  return static_cast<int>(status);
}

// Shortest text that reads back as the same double, as in the metrics CSVs.
std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc{} ? std::string(buf, end) : "nan";
}

template <typename T, void (*Free)(T*)>
struct Owned {
  T* ptr = nullptr;
  ~Owned() { Free(ptr); }
};

int cmd_gen(const std::string& config, std::string out) {
  Owned<sgldl_experiment, sgldl_experiment_free> exp;
  if (auto s = sgldl_experiment_load(config.c_str(), &exp.ptr)) return report(s);
  if (out.empty()) out = (std::filesystem::path(sgldl_experiment_output_dir(exp.ptr)) / "dataset.jsonl").string();
  Owned<sgldl_dataset, sgldl_dataset_free> ds;
  if (auto s = sgldl_dataset_generate(exp.ptr, &ds.ptr)) return report(s);
  if (auto s = sgldl_dataset_save(ds.ptr, out.c_str())) return report(s);
  std::printf("config_sha256 %s\n", sgldl_experiment_hash(exp.ptr));
  std::printf("dataset_sha256 %s %s\n", sgldl_dataset_hash(ds.ptr), out.c_str());
  return 0;
}

int cmd_train(const std::string& config, const std::string& dataset, const std::string& out, std::size_t workers) {
  Owned<sgldl_experiment, sgldl_experiment_free> exp;
  if (auto s = sgldl_experiment_load(config.c_str(), &exp.ptr)) return report(s);
  Owned<sgldl_dataset, sgldl_dataset_free> ds;
  if (!dataset.empty()) {
    if (auto s = sgldl_dataset_load(dataset.c_str(), &ds.ptr)) return report(s);
  }
  std::printf("config_sha256 %s\n", sgldl_experiment_hash(exp.ptr));
  if (ds.ptr) std::printf("dataset_sha256 %s\n", sgldl_dataset_hash(ds.ptr));
  std::fflush(stdout);
  const sgldl_status s = sgldl_experiment_run(exp.ptr, ds.ptr, out.c_str(), workers);
  if (s == SGLDL_OK) {
    std::printf("wrote %s\n", out.empty() ? sgldl_experiment_output_dir(exp.ptr) : out.c_str());
  }
  return report(s);
}

int cmd_eval(const std::string& checkpoint, const std::string& dataset, std::size_t task) {
  Owned<sgldl_model, sgldl_model_free> model;
  if (auto s = sgldl_model_load(checkpoint.c_str(), &model.ptr)) return report(s);
  Owned<sgldl_dataset, sgldl_dataset_free> ds;
  if (auto s = sgldl_dataset_load(dataset.c_str(), &ds.ptr)) return report(s);
  if (task == 0) task = static_cast<std::size_t>(sgldl_model_task_index(model.ptr));
  sgldl_metrics m{};
  if (auto s = sgldl_model_evaluate(model.ptr, ds.ptr, task, &m)) return report(s);
  std::printf("task_index,labels_learned,dis1,dis2,sim1,sim2,skipped_instances\n");
  std::printf("%zu,%zu,%s,%s,%s,%s,%zu\n", task, m.labels_learned, shortest(m.dis1).c_str(), shortest(m.dis2).c_str(),
              shortest(m.sim1).c_str(), shortest(m.sim2).c_str(), m.skipped);
  return 0;
}

int cmd_export_scm(const std::string& checkpoint, const std::string& out) {
  Owned<sgldl_model, sgldl_model_free> model;
  if (auto s = sgldl_model_load(checkpoint.c_str(), &model.ptr)) return report(s);
  return report(sgldl_model_export_scm_csv(model.ptr, out.c_str()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scalable graph label distribution learning experiments"};
  app.set_version_flag("--version", sgldl_version());
  app.require_subcommand(1);

  std::string config, dataset, checkpoint, out;
  std::size_t task = 0;
  std::size_t workers = 1;

  auto* gen = app.add_subcommand("gen", "generate the synthetic stream and print its hash");
  gen->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "dataset path (default <output_dir>/dataset.jsonl)");

  auto* train = app.add_subcommand("train", "run every (method, seed) cell of the config");
  train->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  train->add_option("--dataset", dataset, "dataset from `gen` (default: regenerate)")->check(CLI::ExistingFile);
  train->add_option("--out", out, "output directory (default: output_dir from the config)");
  train->add_option("--workers", workers, "parallel cells")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval", "score a checkpoint on a task's cumulative test set");
  eval->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  eval->add_option("--dataset", dataset)->required()->check(CLI::ExistingFile);
  eval->add_option("--task", task, "task whose labels to restrict to (default: the checkpoint's)");

  auto* export_scm = app.add_subcommand("export-scm", "write a checkpoint's correlation matrix as a heatmap CSV");
  export_scm->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  export_scm->add_option("--out", out, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    if (code != 0) std::fprintf(stderr, "error: code=usage message=%s\n", err.what());
    return code;
  }

  if (*gen) return cmd_gen(config, out);
  if (*train) return cmd_train(config, dataset, out, workers);
  if (*eval) return cmd_eval(checkpoint, dataset, task);
  return cmd_export_scm(checkpoint, out);
}
