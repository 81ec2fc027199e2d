#include "granular/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace granular;

// Known-answer vectors of Philox4x64-10 from the Random123 distribution.
TEST_CASE("philox4x64-10 known answers") {
  using C = Philox4x64::Counter;
  using K = Philox4x64::Key;
  CHECK(Philox4x64::generate(C{0, 0, 0, 0}, K{0, 0}) ==
        C{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL});
  const std::uint64_t ones = ~0ULL;
  CHECK(Philox4x64::generate(C{ones, ones, ones, ones}, K{ones, ones}) ==
        C{0x87b092c3013fe90bULL, 0x438c3c67be8d0224ULL, 0x9cc7d7c69cd777b6ULL, 0xa09caebf594f0ba0ULL});
  CHECK(Philox4x64::generate(C{0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL, 0xa4093822299f31d0ULL,
                               0x082efa98ec4e6c89ULL},
                             K{0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL}) ==
        C{0xa528f45403e61d95ULL, 0x38c72dbd566e9788ULL, 0xa5a1610e72fd18b5ULL, 0x57bd43b5e52b7fe6ULL});
}

TEST_CASE("uniform_open stays inside (0, 1)") {
  CHECK(uniform_open(0) > 0.0);
  CHECK(uniform_open(~0ULL) < 1.0);
  CHECK(uniform_open(1ULL << 63) == doctest::Approx(0.5));
}

TEST_CASE("normal quantile") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054));
}

TEST_CASE("brownian normals have unit variance and no lag-one correlation") {
  const BrownianSource noise(7);
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0, lag = 0, prev = 0;
  for (int k = 0; k < n; ++k) {
    const double z = noise.normal(static_cast<std::uint64_t>(k % 97), static_cast<std::uint64_t>(k / 97), 3);
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
    lag += z * prev;
    prev = z;
  }
  CHECK(std::abs(s1 / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(s4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
  CHECK(std::abs(lag / n) < 4.0 / std::sqrt(n));
}

TEST_CASE("brownian increments depend only on their address") {
  const BrownianSource noise(99);
  std::vector<double> block(10);
  noise.normals(5, 17, 2, block);
  // read back in reverse order, one at a time
  for (int k = 9; k >= 0; --k) CHECK(noise.normal(5, 17, static_cast<std::uint64_t>(k), 2) == block[k]);
  CHECK(noise.normal(5, 17, 0, 2) != noise.normal(5, 17, 0, 3));
  CHECK(noise.normal(5, 17, 0, 2) != noise.normal(6, 17, 0, 2));
  CHECK(BrownianSource(99).normal(1, 2, 3) == noise.normal(1, 2, 3));
  CHECK(BrownianSource(98).normal(1, 2, 3) != noise.normal(1, 2, 3));
}

TEST_CASE("domains separate consumers of the same seed") {
  const CounterRng a(3, RngDomain::Initial), b(3, RngDomain::Probe);
  CHECK(a.uniform(0, 0, 0) != b.uniform(0, 0, 0));
  CHECK(derive_seed(3, 0) != derive_seed(3, 1));
  CHECK(derive_seed(3, 0) == derive_seed(3, 0));
}
