#include "model.hpp"

#include <cmath>

#include "json.hpp"

namespace sgldl {

using nlohmann::json;

namespace {
constexpr std::uint64_t kDenseHeadStream = 0x64656e73;  // "dens"
}

Network Network::fresh(HeadKind head, const ModelDims& dims, std::uint64_t seed) {
  Network net;
  net.head = head;
  net.dims = dims;
  net.seed = seed;
  net.extractor = init_extractor(dims.input_dim, dims.extractor_hidden, dims.extractor_hidden, dims.feature_dim, seed);
  if (head == HeadKind::graph) {
    net.gcn = init_gcn_params(dims.embedding_dim, dims.hidden_dim, dims.feature_dim, seed);
    net.node_embeddings = Matrix(0, static_cast<Eigen::Index>(dims.embedding_dim));
  }
  net.dense_head = Matrix(0, static_cast<Eigen::Index>(dims.feature_dim));
  net.adjacency = Matrix(0, 0);
  return net;
}

void Network::set_scm(ScalableCorrelationMatrix matrix) {
  if (matrix.labels() != labels) fail(ErrorKind::state, "SCM label space does not match the network");
  adjacency = normalize_adjacency(matrix.entries());
  scm = std::move(matrix);
}

void Network::add_labels(const LabelSpace& added) {
  labels = labels.extended(added);
  if (head == HeadKind::graph) {
    node_embeddings = init_node_embeddings(labels, dims.embedding_dim, seed);
    return;
  }
  const Eigen::Index old_rows = dense_head.rows();
  const auto width = static_cast<Eigen::Index>(dims.feature_dim);
  Matrix grown(old_rows + static_cast<Eigen::Index>(added.size()), width);
  grown.topRows(old_rows) = dense_head;
  const double bound = 1.0 / std::sqrt(static_cast<double>(width));
  for (std::size_t i = 0; i < added.size(); ++i) {
    Rng rng(derive_seed({seed, kDenseHeadStream, added[i]}));
    for (Eigen::Index c = 0; c < width; ++c) {
      grown(old_rows + static_cast<Eigen::Index>(i), c) = rng.uniform(-bound, bound);
    }
  }
  dense_head = std::move(grown);
}

Matrix Network::class_embeddings() const {
  if (head == HeadKind::dense) return dense_head;
  if (static_cast<std::size_t>(adjacency.rows()) != labels.size()) {
    fail(ErrorKind::state, "graph head has no correlation matrix for its label space");
  }
  return gcn_forward(adjacency, node_embeddings, gcn).output;
}

Matrix Network::predict(const Matrix& inputs) const {
  const Matrix features = extract(extractor, inputs);
  const Matrix scores = features * class_embeddings().transpose();
  Matrix out(scores.rows(), scores.cols());
  for (Eigen::Index k = 0; k < scores.rows(); ++k) {
    const Eigen::RowVectorXd row = scores.row(k);
    Eigen::RowVectorXd prob(row.size());
    softmax_into(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())),
                 std::span<double>(prob.data(), static_cast<std::size_t>(prob.size())));
    out.row(k) = prob;
  }
  return out;
}

std::size_t Network::head_parameter_count() const {
  if (head == HeadKind::dense) return static_cast<std::size_t>(dense_head.size());
  return static_cast<std::size_t>(gcn.w1.size() + gcn.w2.size());
}

ModelState ModelState::fresh(HeadKind head, const ModelDims& dims, std::uint64_t seed) {
  ModelState state;
  state.current = Network::fresh(head, dims, seed);
  state.stored_embedding = Matrix(0, static_cast<Eigen::Index>(dims.feature_dim));
  return state;
}

// ---- checkpoint serialization ----

namespace {

json matrix_to_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (rows < 0 || cols < 0 || !data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    fail(ErrorKind::parse, where + ": matrix data does not match its shape header");
  }
  Matrix m(rows, cols);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[i++].get<double>();
  return m;
}

json vector_to_json(const Vector& v) { return matrix_to_json(Matrix(v)); }

Vector vector_from_json(const json& j, const std::string& where) {
  Matrix m = matrix_from_json(j, where);
  if (m.cols() != 1) fail(ErrorKind::parse, where + ": expected a column vector");
  return m.col(0);
}

json network_to_json(const Network& net) {
  json j;
  j["head"] = net.head == HeadKind::graph ? "graph" : "dense";
  j["seed"] = net.seed;
  j["dims"] = {{"input_dim", net.dims.input_dim},
               {"extractor_hidden", net.dims.extractor_hidden},
               {"embedding_dim", net.dims.embedding_dim},
               {"hidden_dim", net.dims.hidden_dim},
               {"feature_dim", net.dims.feature_dim}};
  j["labels"] = net.labels.ids();
  const auto& e = net.extractor;
  j["extractor"] = {{"w1", matrix_to_json(e.w1)}, {"b1", vector_to_json(e.b1)}, {"w2", matrix_to_json(e.w2)},
                    {"b2", vector_to_json(e.b2)}, {"w3", matrix_to_json(e.w3)}, {"b3", vector_to_json(e.b3)}};
  if (net.head == HeadKind::graph) {
    j["gcn"] = {{"w1", matrix_to_json(net.gcn.w1)}, {"w2", matrix_to_json(net.gcn.w2)}};
    j["node_embeddings"] = matrix_to_json(net.node_embeddings);
    if (!net.scm.empty()) {
      j["scm"] = {{"labels", net.scm.labels().ids()},
                  {"block_boundary", net.scm.block_boundary()},
                  {"entries", matrix_to_json(net.scm.entries())}};
    }
  } else {
    j["dense_head"] = matrix_to_json(net.dense_head);
  }
  return j;
}

Network network_from_json(const json& j, const std::string& where) {
  Network net;
  const auto head = j.at("head").get<std::string>();
  if (head == "graph") {
    net.head = HeadKind::graph;
  } else if (head == "dense") {
    net.head = HeadKind::dense;
  } else {
    fail(ErrorKind::parse, where + ": unknown head kind '" + head + "'");
  }
  net.seed = j.at("seed").get<std::uint64_t>();
  const json& dims = j.at("dims");
  net.dims.input_dim = dims.at("input_dim").get<std::size_t>();
  net.dims.extractor_hidden = dims.at("extractor_hidden").get<std::size_t>();
  net.dims.embedding_dim = dims.at("embedding_dim").get<std::size_t>();
  net.dims.hidden_dim = dims.at("hidden_dim").get<std::size_t>();
  net.dims.feature_dim = dims.at("feature_dim").get<std::size_t>();
  net.labels = LabelSpace(j.at("labels").get<std::vector<LabelId>>());
  const json& e = j.at("extractor");
  net.extractor.w1 = matrix_from_json(e.at("w1"), where + ".extractor.w1");
  net.extractor.b1 = vector_from_json(e.at("b1"), where + ".extractor.b1");
  net.extractor.w2 = matrix_from_json(e.at("w2"), where + ".extractor.w2");
  net.extractor.b2 = vector_from_json(e.at("b2"), where + ".extractor.b2");
  net.extractor.w3 = matrix_from_json(e.at("w3"), where + ".extractor.w3");
  net.extractor.b3 = vector_from_json(e.at("b3"), where + ".extractor.b3");
  const auto& x = net.extractor;
  if (x.w1.cols() != static_cast<Eigen::Index>(net.dims.input_dim) || x.b1.size() != x.w1.rows() ||
      x.w2.cols() != x.w1.rows() || x.b2.size() != x.w2.rows() || x.w3.cols() != x.w2.rows() ||
      x.b3.size() != x.w3.rows() || x.w3.rows() != static_cast<Eigen::Index>(net.dims.feature_dim)) {
    fail(ErrorKind::parse, where + ": extractor shapes are inconsistent");
  }
  const auto n_labels = static_cast<Eigen::Index>(net.labels.size());
  if (net.head == HeadKind::graph) {
    net.gcn.w1 = matrix_from_json(j.at("gcn").at("w1"), where + ".gcn.w1");
    net.gcn.w2 = matrix_from_json(j.at("gcn").at("w2"), where + ".gcn.w2");
    net.node_embeddings = matrix_from_json(j.at("node_embeddings"), where + ".node_embeddings");
    if (net.gcn.w1.rows() != static_cast<Eigen::Index>(net.dims.embedding_dim) ||
        net.gcn.w1.cols() != static_cast<Eigen::Index>(net.dims.hidden_dim) ||
        net.gcn.w2.rows() != net.gcn.w1.cols() ||
        net.gcn.w2.cols() != static_cast<Eigen::Index>(net.dims.feature_dim) ||
        net.node_embeddings.rows() != n_labels || net.node_embeddings.cols() != net.gcn.w1.rows()) {
      fail(ErrorKind::parse, where + ": graph head shapes are inconsistent");
    }
    net.dense_head = Matrix(0, static_cast<Eigen::Index>(net.dims.feature_dim));
    net.adjacency = Matrix(0, 0);
    if (j.contains("scm")) {
      const json& s = j.at("scm");
      Matrix entries = matrix_from_json(s.at("entries"), where + ".scm.entries");
      LabelSpace scm_labels(s.at("labels").get<std::vector<LabelId>>());
      const auto boundary = s.at("block_boundary").get<std::size_t>();
      try {
        net.set_scm(ScalableCorrelationMatrix::restore(std::move(scm_labels), std::move(entries), boundary));
      } catch (const Error& err) {
        fail(ErrorKind::parse, where + ".scm: " + err.what());
      }
    }
  } else {
    net.dense_head = matrix_from_json(j.at("dense_head"), where + ".dense_head");
    if (net.dense_head.rows() != n_labels || net.dense_head.cols() != static_cast<Eigen::Index>(net.dims.feature_dim)) {
      fail(ErrorKind::parse, where + ": dense head shape is inconsistent");
    }
  }
  return net;
}

}  // namespace

std::string checkpoint_to_json(const ModelState& state) {
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["artifact_version"] = kVersion;
  if (!state.provenance.empty()) j["provenance"] = json::parse(state.provenance);
  j["task_index"] = state.task_index;
  j["current"] = network_to_json(state.current);
  j["stored_embedding"] = matrix_to_json(state.stored_embedding);
  if (state.snapshot) j["snapshot"] = network_to_json(*state.snapshot);
  return j.dump(1) + "\n";
}

ModelState checkpoint_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    fail(ErrorKind::parse, std::string("checkpoint: ") + err.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
      fail(ErrorKind::parse, "checkpoint: not an sgldl checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      fail(ErrorKind::parse, "checkpoint: version " + std::to_string(version) + " is not supported (expected " +
                                 std::to_string(kCheckpointVersion) + ")");
    }
    ModelState state;
    state.task_index = j.at("task_index").get<int>();
    if (j.contains("provenance")) state.provenance = j.at("provenance").dump();
    state.current = network_from_json(j.at("current"), "current");
    state.stored_embedding = matrix_from_json(j.at("stored_embedding"), "stored_embedding");
    if (j.contains("snapshot")) {
      state.snapshot = std::make_shared<const Network>(network_from_json(j.at("snapshot"), "snapshot"));
    }
    return state;
  } catch (const json::exception& err) {
    fail(ErrorKind::parse, std::string("checkpoint: ") + err.what());
  }
}

void save_checkpoint(const ModelState& state, const std::filesystem::path& path) {
  write_file_atomic(path, checkpoint_to_json(state));
}

ModelState load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_file(path));
}

}  // namespace sgldl
