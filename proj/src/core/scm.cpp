#include "scm.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

namespace sgldl {

std::optional<double> new_new_stat(double d_i, double d_j) {
  if (d_j == 0.0) return std::nullopt;
  return d_i / d_j;
}

std::optional<double> old_new_stat(double d_new, double d_old, double d_old_pred) {
  if (d_old_pred == 0.0 || d_old == 0.0 || d_new == 1.0) return std::nullopt;
  return d_new / std::sqrt((1.0 - d_new) * d_old_pred * d_old);
}

std::optional<double> new_old_stat(double d_new, double d_old, double d_old_pred) {
  if (d_new == 0.0) return std::nullopt;
  return std::sqrt((1.0 - d_new) * d_old_pred * d_old) / d_new;
}

double coefficient_of_variation(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double s : samples) sum += s;
  const double mean = sum / n;
  if (mean == 0.0) return 0.0;
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  return std::sqrt(ss / n) / mean;
}

namespace {

void check_task_data(const Matrix& targets, std::size_t old_count, const char* who) {
  if (targets.rows() == 0) fail(ErrorKind::invalid_argument, std::string(who) + ": empty dataset");
  if (old_count >= static_cast<std::size_t>(targets.cols())) {
    fail(ErrorKind::shape, std::string(who) + ": task has no new labels");
  }
}

void check_old_outputs(const Matrix& targets, const Matrix& old_outputs, std::size_t old_count,
                       const char* who) {
  if (old_count == 0) fail(ErrorKind::shape, std::string(who) + ": needs at least one old label");
  if (old_outputs.rows() != targets.rows() || static_cast<std::size_t>(old_outputs.cols()) != old_count) {
    fail(ErrorKind::shape, std::string(who) + ": old outputs must be " + std::to_string(targets.rows()) +
                               " x " + std::to_string(old_count));
  }
}

// Aggregates an admissible-sample statistic into one CV per (row, col).
template <typename Stat>
BlockStatistics aggregate(Eigen::Index rows, Eigen::Index cols, Eigen::Index samples, Stat&& stat) {
  BlockStatistics out{Matrix::Zero(rows, cols), Eigen::MatrixXi::Zero(rows, cols)};
  std::vector<double> buffer;
  buffer.reserve(static_cast<std::size_t>(samples));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      buffer.clear();
      for (Eigen::Index k = 0; k < samples; ++k) {
        if (auto v = stat(k, r, c)) buffer.push_back(*v);
      }
      out.values(r, c) = coefficient_of_variation(buffer);
      out.counts(r, c) = static_cast<int>(buffer.size());
    }
  }
  return out;
}

}  // namespace

BlockStatistics compute_m(const Matrix& targets, std::size_t old_count) {
  check_task_data(targets, old_count, "compute_m");
  const auto base = static_cast<Eigen::Index>(old_count);
  const Eigen::Index fresh = targets.cols() - base;
  return aggregate(fresh, fresh, targets.rows(), [&](Eigen::Index k, Eigen::Index i, Eigen::Index j) {
    return new_new_stat(targets(k, base + i), targets(k, base + j));
  });
}

BlockStatistics compute_e(const Matrix& targets, const Matrix& old_outputs, std::size_t old_count) {
  check_task_data(targets, old_count, "compute_e");
  check_old_outputs(targets, old_outputs, old_count, "compute_e");
  const auto base = static_cast<Eigen::Index>(old_count);
  const Eigen::Index fresh = targets.cols() - base;
  return aggregate(base, fresh, targets.rows(), [&](Eigen::Index k, Eigen::Index a, Eigen::Index b) {
    return old_new_stat(targets(k, base + b), targets(k, a), old_outputs(k, a));
  });
}

BlockStatistics compute_r(const Matrix& targets, const Matrix& old_outputs, std::size_t old_count) {
  check_task_data(targets, old_count, "compute_r");
  check_old_outputs(targets, old_outputs, old_count, "compute_r");
  const auto base = static_cast<Eigen::Index>(old_count);
  const Eigen::Index fresh = targets.cols() - base;
  return aggregate(fresh, base, targets.rows(), [&](Eigen::Index k, Eigen::Index b, Eigen::Index a) {
    return new_old_stat(targets(k, base + b), targets(k, a), old_outputs(k, a));
  });
}

void apply_threshold(Matrix& block, double tau) {
  for (Eigen::Index i = 0; i < block.size(); ++i) {
    if (block.data()[i] < tau) block.data()[i] = 0.0;
  }
}

ScalableCorrelationMatrix::ScalableCorrelationMatrix(LabelSpace labels, Matrix entries, std::size_t boundary)
    : labels_(std::move(labels)), entries_(std::move(entries)), block_boundary_(boundary) {
  validate();
}

void ScalableCorrelationMatrix::validate() const {
  const auto n = static_cast<Eigen::Index>(labels_.size());
  if (entries_.rows() != n || entries_.cols() != n) {
    fail(ErrorKind::shape, "SCM entries must be " + std::to_string(n) + " x " + std::to_string(n));
  }
  if (block_boundary_ > labels_.size()) fail(ErrorKind::shape, "SCM block boundary beyond label count");
  for (Eigen::Index i = 0; i < entries_.size(); ++i) {
    const double v = entries_.data()[i];
    if (!std::isfinite(v) || v < 0.0) fail(ErrorKind::numeric, "SCM entries must be finite and non-negative");
  }
}

ScalableCorrelationMatrix ScalableCorrelationMatrix::first(LabelSpace labels, Matrix m) {
  return ScalableCorrelationMatrix(std::move(labels), std::move(m), 0);
}

ScalableCorrelationMatrix ScalableCorrelationMatrix::restore(LabelSpace labels, Matrix entries,
                                                             std::size_t block_boundary) {
  return ScalableCorrelationMatrix(std::move(labels), std::move(entries), block_boundary);
}

ScalableCorrelationMatrix ScalableCorrelationMatrix::extend(const ScalableCorrelationMatrix& previous,
                                                            const LabelSpace& new_labels, const Matrix& m,
                                                            const Matrix& e, const Matrix& r) {
  if (previous.empty()) return first(new_labels, m);
  const auto old_n = static_cast<Eigen::Index>(previous.size());
  const auto new_n = static_cast<Eigen::Index>(new_labels.size());
  if (m.rows() != new_n || m.cols() != new_n) fail(ErrorKind::shape, "extend_scm: M has wrong shape");
  if (e.rows() != old_n || e.cols() != new_n) fail(ErrorKind::shape, "extend_scm: E has wrong shape");
  if (r.rows() != new_n || r.cols() != old_n) fail(ErrorKind::shape, "extend_scm: R has wrong shape");

  Matrix entries(old_n + new_n, old_n + new_n);
  entries.topLeftCorner(old_n, old_n) = previous.entries();
  entries.topRightCorner(old_n, new_n) = e;
  entries.bottomLeftCorner(new_n, old_n) = r;
  entries.bottomRightCorner(new_n, new_n) = m;
  return ScalableCorrelationMatrix(previous.labels().extended(new_labels), std::move(entries),
                                   previous.size());
}

std::string ScalableCorrelationMatrix::to_text() const {
  std::string out = "scm " + std::to_string(size()) + " " + std::to_string(block_boundary_) + "\n";
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(labels_[i]);
  }
  out += '\n';
  for (Eigen::Index r = 0; r < entries_.rows(); ++r) {
    for (Eigen::Index c = 0; c < entries_.cols(); ++c) {
      if (c) out += ',';
      out += format_double17(entries_(r, c));
    }
    out += '\n';
  }
  return out;
}

namespace {

[[noreturn]] void parse_error(std::size_t line, std::size_t column, const std::string& what) {
  fail(ErrorKind::parse, "scm:" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

// Splits on commas, reporting each field's 1-based starting column.
std::vector<std::pair<std::string_view, std::size_t>> split_fields(std::string_view line, char sep) {
  std::vector<std::pair<std::string_view, std::size_t>> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(sep, start);
    if (end == std::string_view::npos) {
      fields.emplace_back(line.substr(start), start + 1);
      break;
    }
    fields.emplace_back(line.substr(start, end - start), start + 1);
    start = end + 1;
  }
  return fields;
}

std::size_t parse_count(std::string_view field, std::size_t line, std::size_t column) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    parse_error(line, column, "expected a non-negative integer, got '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

ScalableCorrelationMatrix ScalableCorrelationMatrix::from_text(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) parse_error(1, 1, "empty input");

  const auto header = split_fields(lines[0], ' ');
  if (header.size() != 3 || header[0].first != "scm") {
    parse_error(1, 1, "expected header 'scm <count> <block_boundary>'");
  }
  const std::size_t n = parse_count(header[1].first, 1, header[1].second);
  const std::size_t boundary = parse_count(header[2].first, 1, header[2].second);
  if (boundary > n) parse_error(1, header[2].second, "block boundary exceeds label count");
  if (n == 0) parse_error(1, header[1].second, "label count must be positive");
  if (lines.size() < 2) parse_error(2, 1, "missing label-id line");

  const auto id_fields = split_fields(lines[1], ',');
  if (id_fields.size() != n) {
    parse_error(2, 1, "expected " + std::to_string(n) + " label ids, found " + std::to_string(id_fields.size()));
  }
  std::vector<LabelId> ids;
  for (const auto& [field, column] : id_fields) {
    ids.push_back(static_cast<LabelId>(parse_count(field, 2, column)));
  }

  std::size_t row_lines = lines.size() - 2;
  while (row_lines > n && lines[2 + row_lines - 1].empty()) --row_lines;
  if (row_lines != n) {
    parse_error(lines.size() + 1, 1,
                "expected " + std::to_string(n) + " matrix rows, found " + std::to_string(row_lines));
  }
  Matrix entries(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t line_no = r + 3;
    const auto fields = split_fields(lines[r + 2], ',');
    if (fields.size() != n) {
      parse_error(line_no, 1, "expected " + std::to_string(n) + " values, found " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < n; ++c) {
      try {
        entries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_double(fields[c].first);
      } catch (const Error& err) {
        parse_error(line_no, fields[c].second, err.what());
      }
    }
  }
  try {
    return ScalableCorrelationMatrix(LabelSpace(std::move(ids)), std::move(entries), boundary);
  } catch (const Error& err) {
    fail(ErrorKind::parse, std::string("scm: ") + err.what());
  }
}

std::string ScalableCorrelationMatrix::to_heatmap_csv(std::string_view provenance) const {
  std::string out(provenance);
  out += "# block_boundary=" + std::to_string(block_boundary_) + "\n";
  out += "row_label,col_label,value\n";
  for (Eigen::Index r = 0; r < entries_.rows(); ++r) {
    for (Eigen::Index c = 0; c < entries_.cols(); ++c) {
      out += std::to_string(labels_[static_cast<std::size_t>(r)]) + "," +
             std::to_string(labels_[static_cast<std::size_t>(c)]) + "," + format_double17(entries_(r, c)) + "\n";
    }
  }
  return out;
}

}  // namespace sgldl
