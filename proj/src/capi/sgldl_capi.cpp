#include "sgldl/sgldl.h"

#include <cstring>
#include <exception>
#include <string>

#include "experiment.hpp"
#include "model.hpp"

struct sgldl_experiment {
  sgldl::ExperimentConfig cfg;
};

struct sgldl_dataset {
  sgldl::Dataset data;
};

struct sgldl_model {
  sgldl::ModelState state;
};

namespace {

thread_local std::string last_error;

sgldl_status status_of(sgldl::ErrorKind kind) {
  using sgldl::ErrorKind;
  switch (kind) {
    case ErrorKind::invalid_argument: return SGLDL_ERR_INVALID_ARGUMENT;
    case ErrorKind::shape: return SGLDL_ERR_SHAPE;
    case ErrorKind::parse: return SGLDL_ERR_PARSE;
    case ErrorKind::config: return SGLDL_ERR_CONFIG;
    case ErrorKind::io: return SGLDL_ERR_IO;
    case ErrorKind::numeric: return SGLDL_ERR_NUMERIC;
    case ErrorKind::state: return SGLDL_ERR_STATE;
    case ErrorKind::degenerate: return SGLDL_ERR_DEGENERATE;
  }
  return SGLDL_ERR_INTERNAL;
}

sgldl_status set_error(sgldl_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <typename F>
sgldl_status guarded(F&& body) {
  last_error.clear();
  try {
    return body();
  } catch (const sgldl::Error& err) {
    return set_error(status_of(err.kind()), err.what());
  } catch (const std::bad_alloc&) {
    return set_error(SGLDL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& err) {
    return set_error(SGLDL_ERR_INTERNAL, err.what());
  }
}

#define SGLDL_REQUIRE(cond, what) \
  if (!(cond)) return set_error(SGLDL_ERR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* sgldl_version(void) { return sgldl::kVersion; }

const char* sgldl_status_string(sgldl_status status) {
  switch (status) {
    case SGLDL_OK: return "ok";
    case SGLDL_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SGLDL_ERR_SHAPE: return "shape";
    case SGLDL_ERR_PARSE: return "parse";
    case SGLDL_ERR_CONFIG: return "config";
    case SGLDL_ERR_IO: return "io";
    case SGLDL_ERR_NUMERIC: return "numeric";
    case SGLDL_ERR_STATE: return "state";
    case SGLDL_ERR_DEGENERATE: return "degenerate";
    case SGLDL_ERR_CELL_FAILED: return "cell_failed";
    case SGLDL_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* sgldl_last_error(void) { return last_error.c_str(); }

sgldl_status sgldl_experiment_load(const char* path, sgldl_experiment** out) {
  SGLDL_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new sgldl_experiment{sgldl::load_experiment_config(path)};
    return SGLDL_OK;
  });
}

sgldl_status sgldl_experiment_parse(const char* json_text, sgldl_experiment** out) {
  SGLDL_REQUIRE(json_text && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new sgldl_experiment{sgldl::parse_experiment_config(json_text)};
    return SGLDL_OK;
  });
}

void sgldl_experiment_free(sgldl_experiment* exp) { delete exp; }

const char* sgldl_experiment_hash(const sgldl_experiment* exp) { return exp ? exp->cfg.hash.c_str() : ""; }

const char* sgldl_experiment_output_dir(const sgldl_experiment* exp) {
  return exp ? exp->cfg.output_dir.c_str() : "";
}

sgldl_status sgldl_dataset_generate(const sgldl_experiment* exp, sgldl_dataset** out) {
  SGLDL_REQUIRE(exp && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new sgldl_dataset{sgldl::generate_dataset(exp->cfg)};
    return SGLDL_OK;
  });
}

sgldl_status sgldl_dataset_load(const char* path, sgldl_dataset** out) {
  SGLDL_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new sgldl_dataset{sgldl::load_dataset(path)};
    return SGLDL_OK;
  });
}

sgldl_status sgldl_dataset_save(const sgldl_dataset* ds, const char* path) {
  SGLDL_REQUIRE(ds && path, "null argument");
  return guarded([&] {
    sgldl::write_file_atomic(path, ds->data.text);
    return SGLDL_OK;
  });
}

const char* sgldl_dataset_hash(const sgldl_dataset* ds) { return ds ? ds->data.sha256.c_str() : ""; }

size_t sgldl_dataset_num_tasks(const sgldl_dataset* ds) { return ds ? ds->data.stream.tasks.size() : 0; }

void sgldl_dataset_free(sgldl_dataset* ds) { delete ds; }

sgldl_status sgldl_experiment_run(const sgldl_experiment* exp, const sgldl_dataset* ds, const char* out_dir,
                                  size_t workers) {
  SGLDL_REQUIRE(exp, "null experiment");
  return guarded([&] {
    const sgldl::ExperimentConfig& cfg = exp->cfg;
    sgldl::Dataset generated;
    const sgldl::Dataset* data = ds ? &ds->data : nullptr;
    if (!data) {
      generated = sgldl::generate_dataset(cfg);
      data = &generated;
    }
    if (cfg.dataset_sha256 && *cfg.dataset_sha256 != data->sha256) {
      sgldl::fail(sgldl::ErrorKind::config,
                  "dataset sha256 " + data->sha256 + " does not match pinned " + *cfg.dataset_sha256);
    }
    const std::filesystem::path dir = out_dir && *out_dir ? std::filesystem::path(out_dir)
                                                                : std::filesystem::path(cfg.output_dir);
    const sgldl::ExperimentReport report = sgldl::run_cells(cfg, data->stream, dir, workers);
    sgldl::write_reports(cfg, report, dir);
    if (report.ok()) return SGLDL_OK;
    std::string message;
    for (const sgldl::CellResult& cell : report.cells) {
      if (!cell.error) continue;
      if (!message.empty()) message += "; ";
      message += std::string(sgldl::method_name(cell.method)) + " seed " + std::to_string(cell.seed) + ": " +
                 *cell.error;
    }
    return set_error(SGLDL_ERR_CELL_FAILED, message);
  });
}

sgldl_status sgldl_model_load(const char* path, sgldl_model** out) {
  SGLDL_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new sgldl_model{sgldl::load_checkpoint(path)};
    return SGLDL_OK;
  });
}

void sgldl_model_free(sgldl_model* model) { delete model; }

int sgldl_model_task_index(const sgldl_model* model) { return model ? model->state.task_index : -1; }

size_t sgldl_model_num_labels(const sgldl_model* model) { return model ? model->state.current.labels.size() : 0; }

size_t sgldl_model_input_dim(const sgldl_model* model) {
  return model ? static_cast<size_t>(model->state.current.extractor.input_dim()) : 0;
}

sgldl_status sgldl_model_predict(const sgldl_model* model, const double* features, size_t n, double* out) {
  SGLDL_REQUIRE(model && (n == 0 || (features && out)), "null argument");
  return guarded([&] {
    const sgldl::Network& net = model->state.current;
    if (net.labels.empty()) sgldl::fail(sgldl::ErrorKind::state, "model has not learned any labels");
    const auto rows = static_cast<Eigen::Index>(n);
    const Eigen::Index cols = net.extractor.input_dim();
    const sgldl::Matrix inputs =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(features, rows, cols);
    const sgldl::Matrix probs = net.predict(inputs);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(out, probs.rows(),
                                                                                       probs.cols()) = probs;
    return SGLDL_OK;
  });
}

sgldl_status sgldl_model_evaluate(const sgldl_model* model, const sgldl_dataset* ds, size_t task,
                                  sgldl_metrics* out) {
  SGLDL_REQUIRE(model && ds && out, "null argument");
  return guarded([&] {
    const sgldl::MetricRecord m = sgldl::evaluate_checkpoint(model->state, ds->data.stream, task);
    *out = sgldl_metrics{m.dis1, m.dis2, m.sim1, m.sim2, ds->data.stream.tasks[task - 1].cumulative_labels.size(),
                         m.evaluated, m.skipped};
    return SGLDL_OK;
  });
}

namespace {

const sgldl::ScalableCorrelationMatrix& require_scm(const sgldl_model* model) {
  const sgldl::Network& net = model->state.current;
  if (net.head != sgldl::HeadKind::graph || net.scm.size() == 0) {
    sgldl::fail(sgldl::ErrorKind::state, "checkpoint has no correlation matrix");
  }
  return net.scm;
}

}  // namespace

sgldl_status sgldl_model_export_scm_csv(const sgldl_model* model, const char* path) {
  SGLDL_REQUIRE(model && path, "null argument");
  return guarded([&] {
    const auto& scm = require_scm(model);
    const std::string& prov = model->state.provenance;
    const std::string header = prov.empty() ? std::string() : "# provenance " + prov + "\n";
    sgldl::write_file_atomic(path, scm.to_heatmap_csv(header));
    return SGLDL_OK;
  });
}

sgldl_status sgldl_model_export_scm_text(const sgldl_model* model, const char* path) {
  SGLDL_REQUIRE(model && path, "null argument");
  return guarded([&] {
    sgldl::write_file_atomic(path, require_scm(model).to_text());
    return SGLDL_OK;
  });
}

}  // extern "C"
