#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace sgldl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr const char* kVersion = "0.1.0";

enum class ErrorKind {
  invalid_argument,
  shape,
  parse,
  config,
  io,
  numeric,
  state,
  degenerate,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

// splitmix64 over a key sequence; gives independent, order-sensitive seeds
// for per-label and per-instance generator streams.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys);

// mt19937_64 with portable uniform/normal draws (the std distributions are
// implementation-defined, which would break cross-toolchain reproducibility).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::string sha256_hex(std::string_view data);

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);
// Fixed 17-significant-digit form used by the SCM text format.
std::string format_double17(double value);
double parse_double(std::string_view text);

std::string read_file(const std::filesystem::path& path);
// Write to a sibling temp file, then rename over the destination.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Order-sensitive checksum used to detect forward caches that no longer
// match the parameters they were computed from.
double fingerprint(const Matrix& m);
double fingerprint(const Vector& v);

}  // namespace sgldl
