#include <cmath>

#include "doctest.h"
#include "label_distribution.hpp"
#include "support.hpp"

using namespace sgldl;
using V = std::vector<double>;

TEST_CASE("label distributions validate their degrees") {
  CHECK_NOTHROW(LabelDistribution(V{0.25, 0.75}));
  CHECK_THROWS_AS(LabelDistribution(V{0.5, 0.6}), Error);
  CHECK_THROWS_AS(LabelDistribution(V{-0.1, 1.1}), Error);
  CHECK_THROWS_AS(LabelDistribution(V{}), Error);
}

TEST_CASE("label spaces reject duplicates and extend in order") {
  CHECK_THROWS_AS(LabelSpace({1, 2, 1}), Error);
  const LabelSpace a({3, 1});
  const LabelSpace b = a.extended(LabelSpace({7}));
  CHECK(b.ids() == std::vector<LabelId>{3, 1, 7});
  CHECK(a.is_prefix_of(b));
  CHECK_FALSE(b.is_prefix_of(a));
  CHECK(b.index_of(7) == 2u);
  CHECK_FALSE(b.contains(9));
  CHECK_THROWS_AS(b.extended(LabelSpace({1})), Error);
}

TEST_CASE("euclidean distance") {
  CHECK(euclidean_distance(V{0.5, 0.5}, V{0.5, 0.5}) == 0.0);
  CHECK(euclidean_distance(V{1, 0}, V{0, 1}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(euclidean_distance(V{0.8, 0.2}, V{0.6, 0.4}) == doctest::Approx(std::sqrt(0.08)).epsilon(1e-14));
  CHECK(euclidean_distance(V{0.8, 0.2}, V{0.6, 0.4}) == doctest::Approx(0.28284).epsilon(1e-5));
  CHECK_THROWS_AS(euclidean_distance(V{1}, V{0.5, 0.5}), Error);
}

TEST_CASE("kl divergence uses the standard form") {
  CHECK(kl_divergence(V{0.3, 0.7}, V{0.3, 0.7}) == 0.0);
  CHECK(kl_divergence(V{1, 0}, V{0.5, 0.5}) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(kl_divergence(V{0.8, 0.2}, V{0.5, 0.5}) ==
        doctest::Approx(0.8 * std::log(1.6) + 0.2 * std::log(0.4)).epsilon(1e-14));
  // q = 0 where p > 0 is clamped, not infinite
  CHECK(std::isfinite(kl_divergence(V{0.5, 0.5}, V{1, 0})));
  CHECK_THROWS_AS(kl_divergence(V{1}, V{0.5, 0.5}), Error);
}

TEST_CASE("intersection and fidelity") {
  CHECK(intersection(V{0.2, 0.8}, V{0.2, 0.8}) == doctest::Approx(1.0));
  CHECK(intersection(V{1, 0}, V{0, 1}) == 0.0);
  CHECK(intersection(V{0.8, 0.2}, V{0.6, 0.4}) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(fidelity(V{0.2, 0.8}, V{0.2, 0.8}) == doctest::Approx(1.0));
  CHECK(fidelity(V{1, 0}, V{0, 1}) == 0.0);
  CHECK(fidelity(V{0.5, 0.5}, V{0.2, 0.8}) == doctest::Approx(std::sqrt(0.1) + std::sqrt(0.4)).epsilon(1e-15));
}

TEST_CASE("canberra") {
  CHECK(canberra(V{0.4, 0.6}, V{0.4, 0.6}) == 0.0);
  CHECK(canberra(V{1, 0}, V{0, 1}) == 2.0);
  CHECK(canberra(V{0.8, 0.2}, V{0.6, 0.4}) == doctest::Approx(0.2 / 1.4 + 0.2 / 0.6).epsilon(1e-15));
  CHECK(canberra(V{0.5, 0.5, 0.0}, V{0.5, 0.5, 0.0}) == 0.0);  // 0/0 term
}

TEST_CASE("random pairs stay inside the similarity bounds") {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto n = 2 + rng.index(12);
    const auto p = oracle::random_distribution(rng, n, 0.2);
    const auto q = oracle::random_distribution(rng, n, 0.2);
    CHECK(fidelity(p, q) <= 1.0 + 1e-12);
    CHECK(intersection(p, q) <= 1.0 + 1e-12);
    CHECK(kl_divergence(p, q) >= 0.0);
    CHECK(euclidean_distance(p, p) <= 1e-12);
    CHECK(std::abs(fidelity(p, p) - 1.0) <= 1e-12);
  }
}

TEST_CASE("restriction renormalizes proportionally") {
  const LabelSpace space({0, 1, 2});
  const auto r = restrict_and_renormalize(LabelDistribution(V{0.5, 0.3, 0.2}), space, LabelSpace({0, 1}));
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(r[1] == doctest::Approx(0.375).epsilon(1e-15));

  const auto full = restrict_and_renormalize(LabelDistribution(V{0.5, 0.3, 0.2}), space, space);
  CHECK(full.values() == V{0.5, 0.3, 0.2});

  try {
    restrict_and_renormalize(LabelDistribution(V{0, 0, 1}), space, LabelSpace({0, 1}));
    FAIL("expected a degenerate error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate);
  }
  CHECK_THROWS_AS(restrict_and_renormalize(LabelDistribution(V{0.5, 0.3, 0.2}), space, LabelSpace({4})), Error);
}

TEST_CASE("restriction is idempotent") {
  Rng rng(3);
  const LabelSpace space({0, 1, 2, 3, 4, 5});
  const LabelSpace learned({0, 1, 2, 3});
  for (int i = 0; i < 100; ++i) {
    const LabelDistribution d(oracle::random_distribution(rng, 6));
    const auto once = restrict_and_renormalize(d, space, learned);
    const auto twice = restrict_and_renormalize(once, learned, learned);
    for (std::size_t j = 0; j < 4; ++j) CHECK(once[j] == doctest::Approx(twice[j]).epsilon(1e-15));
  }
}

TEST_CASE("softmax") {
  const auto u = softmax(V{0, 0, 0});
  for (double v : u.values()) CHECK(v == doctest::Approx(1.0 / 3.0));
  const auto two = softmax(V{1.5, 1.5 + std::log(2.0)});
  CHECK(two[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(two[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  const auto big = softmax(V{1000, 1001});
  const auto small = softmax(V{0, 1});
  CHECK(big[0] == doctest::Approx(small[0]).epsilon(1e-14));
  CHECK_THROWS_AS(softmax(V{0, NAN}), Error);
  CHECK_THROWS_AS(softmax(V{0, INFINITY}), Error);
}

TEST_CASE("softmax sums to one and ignores shifts") {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    V a(2 + rng.index(20));
    for (double& v : a) v = rng.uniform(-20, 20);
    const double c = rng.uniform(-50, 50);
    V shifted = a;
    for (double& v : shifted) v += c;
    const auto p = softmax(a), q = softmax(shifted);
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      s += p[j];
      CHECK(std::abs(p[j] - q[j]) <= 1e-12);
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
    const auto ref = oracle::softmax(a);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(p[j] - ref[j]) <= 1e-15);
  }
}
