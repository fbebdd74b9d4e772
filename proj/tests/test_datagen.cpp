#include <cmath>
#include <set>

#include "datagen.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace sgldl;

namespace {

StreamConfig small_stream() {
  StreamConfig c;
  c.total_labels = 8;
  c.tasks = 4;
  c.train_per_task = 40;
  c.test_per_task = 15;
  c.feature_dim = 6;
  c.seed = 77;
  return c;
}

}  // namespace

TEST_CASE("gaussian degrees") {
  const LabelSpace five({0, 1, 2, 3, 4});
  const auto d = gaussian_distribution(2.0, five, 3.0);
  double total = 0.0;
  for (int j = 0; j < 5; ++j) total += std::exp(-(j - 2.0) * (j - 2.0) / 18.0);
  for (std::size_t j = 0; j < 5; ++j) {
    const double off = static_cast<double>(j) - 2.0;
    CHECK(d[j] == doctest::Approx(std::exp(-off * off / 18.0) / total).epsilon(1e-14));
  }
  CHECK(d[0] == doctest::Approx(d[4]).epsilon(1e-15));
  CHECK(d[2] > d[1]);
  // only the ids matter, not their position in the space
  const auto sub = gaussian_distribution(2.0, LabelSpace({4, 0}), 3.0);
  CHECK(sub[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(gaussian_distribution(2.0, five, 0.0), Error);
  CHECK_THROWS_AS(gaussian_distribution(2.0, LabelSpace(), 1.0), Error);
}

TEST_CASE("features are radial responses plus noise") {
  StreamConfig c = small_stream();
  c.noise = 0.0;
  Rng rng(1);
  const auto x = gen_feature(0, c, rng);
  REQUIRE(x.size() == 6);
  CHECK(x[0] == 1.0);
  CHECK(x[0] > x[1]);
  CHECK(x[5] < x[1]);
  const auto far = gen_feature(7, c, rng);
  CHECK(far[5] == 1.0);
  c.noise = 0.05;
  Rng a(5), b(5);
  CHECK(gen_feature(3, c, a) == gen_feature(3, c, b));
}

TEST_CASE("stream layout") {
  const Stream s = build_stream(small_stream());
  REQUIRE(s.tasks.size() == 4);
  CHECK(s.full_labels.size() == 8);
  LabelSpace cumulative;
  for (const TaskData& t : s.tasks) {
    CHECK(t.new_labels.size() == 2);
    cumulative = cumulative.extended(t.new_labels);
    CHECK(t.cumulative_labels == cumulative);
    CHECK(t.train.size() == 40);
    CHECK(t.test.size() == 15);
    for (const Instance& inst : t.train) {
      CHECK(t.cumulative_labels.contains(inst.mu));
      CHECK(inst.degrees.size() == t.cumulative_labels.size());
      CHECK(inst.x.size() == 6);
    }
    for (const Instance& inst : t.test) {
      CHECK(t.new_labels.contains(inst.mu));
      CHECK(inst.degrees.size() == 8);
    }
  }
  CHECK(s.cumulative_test(3).size() == 45);
  CHECK(s.cumulative_test(3)[15] == &s.tasks[1].test[0]);
  CHECK_THROWS_AS(s.cumulative_test(0), Error);
  CHECK_THROWS_AS(s.cumulative_test(5), Error);
}

TEST_CASE("training centers cover earlier labels") {
  StreamConfig c = small_stream();
  c.train_per_task = 400;
  const Stream s = build_stream(c);
  std::set<LabelId> seen;
  for (const Instance& inst : s.tasks[3].train) seen.insert(inst.mu);
  CHECK(seen.size() == 8);
}

TEST_CASE("streams are deterministic in the seed") {
  const Stream a = build_stream(small_stream());
  const Stream b = build_stream(small_stream());
  CHECK(stream_to_jsonl(a) == stream_to_jsonl(b));
  StreamConfig other = small_stream();
  other.seed = 78;
  CHECK(stream_to_jsonl(build_stream(other)) != stream_to_jsonl(a));
}

TEST_CASE("a task's records do not depend on later tasks") {
  StreamConfig c = small_stream();
  const Stream a = build_stream(c);
  c.train_per_task = 60;
  const Stream b = build_stream(c);
  for (std::size_t i = 0; i < 40; ++i) CHECK(a.tasks[2].train[i].x == b.tasks[2].train[i].x);
  CHECK(a.tasks[2].test[3].x == b.tasks[2].test[3].x);
}

TEST_CASE("jsonl round-trip is exact") {
  const Stream a = build_stream(small_stream());
  const std::string text = stream_to_jsonl(a, R"({"seed":1})");
  const Stream b = stream_from_jsonl(text);
  CHECK(stream_to_jsonl(b, R"({"seed":1})") == text);
  CHECK(b.tasks[1].cumulative_labels == a.tasks[1].cumulative_labels);
  CHECK(inputs_matrix(b.tasks[2].train) == inputs_matrix(a.tasks[2].train));
  CHECK(targets_matrix(b.tasks[3].test) == targets_matrix(a.tasks[3].test));
}

TEST_CASE("jsonl parse errors") {
  const std::string text = stream_to_jsonl(build_stream(small_stream()));
  CHECK_THROWS_AS(stream_from_jsonl(""), Error);
  CHECK_THROWS_AS(stream_from_jsonl(text.substr(0, text.size() / 2)), Error);
  std::string bad = text;
  bad.replace(bad.find("\"train\""), 7, "\"dev\"");
  try {
    stream_from_jsonl(bad);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
  }
}

TEST_CASE("stream config validation") {
  StreamConfig c = small_stream();
  c.tasks = 9;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_stream();
  c.sigma = -1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_stream();
  c.test_per_task = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("matrices from instances") {
  const Stream s = build_stream(small_stream());
  const Matrix y = targets_matrix(s.tasks[1].train);
  CHECK(y.rows() == 40);
  CHECK(y.cols() == 4);
  for (Eigen::Index k = 0; k < y.rows(); ++k) CHECK(std::abs(y.row(k).sum() - 1.0) <= 1e-12);
  CHECK(inputs_matrix({}).size() == 0);
}
