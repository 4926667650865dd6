#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "emspec/fft.hpp"
#include "emspec/random.hpp"
#include "oracles/naive_dft.hpp"

using namespace emspec;

namespace {

std::vector<std::complex<double>> random_vec(std::size_t n, std::uint64_t seed) {
  Rng r(seed);
  std::vector<std::complex<double>> v(n);
  for (auto& z : v) z = r.complex_normal(1.0);
  return v;
}

}  // namespace

TEST_CASE("fft matches direct DFT") {
  for (std::size_t n : {1u, 2u, 4u, 16u, 64u, 256u, 1024u}) {
    CAPTURE(n);
    auto x = random_vec(n, n);
    const auto ref = oracle::naive_dft(x);
    Fft f(n);
    f.forward(x);
    double err = 0.0, mag = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      err = std::max(err, std::abs(x[k] - ref[k]));
      mag = std::max(mag, std::abs(ref[k]));
    }
    CHECK(err <= 1e-12 * std::max(1.0, mag) * std::log2(static_cast<double>(n) + 1));
  }
}

TEST_CASE("inverse undoes forward up to N") {
  const std::size_t n = 512;
  const auto x = random_vec(n, 11);
  auto y = x;
  Fft f(n);
  f.forward(y);
  f.inverse(y);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y[i] / double(n) - x[i]) < 1e-12);
}

TEST_CASE("non power of two rejected") {
  CHECK_THROWS_AS(Fft(12), std::invalid_argument);
  CHECK_THROWS_AS(Fft(0), std::invalid_argument);
}
