#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "minorproc/random_stream.hpp"

using minorproc::RandomStream;

TEST_CASE("same seed gives the same sequence") {
  RandomStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
}

TEST_CASE("split streams are reproducible and distinct") {
  RandomStream root(7);
  RandomStream c1 = root.split(3), c2 = root.split(3), c3 = root.split(4);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 50; ++i) {
    const auto x = c1();
    CHECK(x == c2());
    seen.insert(x);
    seen.insert(c3());
  }
  CHECK(seen.size() == 100);
  CHECK(root.split({1, 2}).key() == root.split(1).split(2).key());
  CHECK(root.split({1, 2}).key() != root.split({2, 1}).key());
}

TEST_CASE("splitting does not advance the parent") {
  RandomStream a(11), b(11);
  (void)a.split(5);
  CHECK(a() == b());
}

TEST_CASE("normal draws look standard") {
  RandomStream rng(2024);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = rng.normal();
  CHECK(testutil::ks_one_sample(xs, testutil::normal_cdf) < 0.015);
  CHECK(std::abs(testutil::mean_of(xs)) < 0.03);
  CHECK(std::abs(testutil::variance_of(xs) - 1.0) < 0.04);
}

TEST_CASE("uniform01 stays in [0,1) and complex normal has unit variance") {
  RandomStream rng(5);
  double s = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    s += std::norm(rng.complex_normal());
  }
  CHECK(std::abs(s / 20000 - 1.0) < 0.03);
}

TEST_CASE("chi squared mean equals degrees of freedom") {
  RandomStream rng(9);
  double s = 0.0;
  for (int i = 0; i < 20000; ++i) s += rng.chi_squared(3.0);
  CHECK(std::abs(s / 20000 - 3.0) < 0.08);
}
