#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "emspec/random.hpp"

using namespace emspec;

TEST_CASE("same seed gives same stream") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs |= x != c.next();
  }
  CHECK(differs);
}

TEST_CASE("derived streams are distinct per path") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 20; ++i)
    for (std::uint64_t j = 0; j < 20; ++j) seen.insert(derive_stream(7, {i, j}));
  CHECK(seen.size() == 400);
  CHECK(derive_stream(7, {1, 2}) != derive_stream(7, {2, 1}));
  CHECK(derive_stream(7, {1, 2}) == derive_stream(7, {1, 2}));
}

TEST_CASE("uniform range and degenerate interval") {
  Rng r(1);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
  CHECK(r.uniform(3.5, 3.5) == 3.5);
  for (int i = 0; i < 1000; ++i) {
    const double v = r.uniform(-2.0, 5.0);
    REQUIRE(v >= -2.0);
    REQUIRE(v < 5.0);
  }
}

TEST_CASE("below is unbiased across residues") {
  Rng r(9);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[r.below(7)];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
  // 6 dof, p = 0.001 critical value 22.46
  CHECK(chi2 < 22.46);
}

TEST_CASE("normal moments") {
  Rng r(3);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("complex normal variance") {
  Rng r(4);
  const int n = 200000;
  double p = 0.0;
  for (int i = 0; i < n; ++i) p += std::norm(r.complex_normal(2.5));
  CHECK(p / n == doctest::Approx(2.5).epsilon(0.01));
}
