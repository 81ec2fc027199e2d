#include "granular/rng.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>

namespace granular {

namespace {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kPhiloxW0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kPhiloxW1 = 0xBB67AE8584CAA73BULL;

inline std::uint64_t mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& lo) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  lo = static_cast<std::uint64_t>(p);
  return static_cast<std::uint64_t>(p >> 64);
}

}  // namespace

Philox4x64::Counter Philox4x64::generate(Counter c, Key k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kPhiloxW0;
      k[1] += kPhiloxW1;
    }
    std::uint64_t lo0 = 0;
    std::uint64_t lo1 = 0;
    const std::uint64_t hi0 = mulhilo(kPhiloxM0, c[0], lo0);
    const std::uint64_t hi1 = mulhilo(kPhiloxM1, c[2], lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform_open(std::uint64_t bits) {
  // 52 bits so that the half-offset stays exact: the result lies in [2^-53, 1 - 2^-53]
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

double normal_quantile(double u) {
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

double CounterRng::uniform(std::uint64_t a, std::uint64_t b, std::uint64_t index) const {
  return uniform_open(bits(a, b, index / 4)[index % 4]);
}

double CounterRng::normal(std::uint64_t a, std::uint64_t b, std::uint64_t index) const {
  return normal_quantile(uniform(a, b, index));
}

void CounterRng::normals(std::uint64_t a, std::uint64_t b, std::span<double> out) const {
  for (std::size_t block = 0; block * 4 < out.size(); ++block) {
    const auto words = bits(a, b, block);
    for (std::size_t lane = 0; lane < 4 && block * 4 + lane < out.size(); ++lane) {
      out[block * 4 + lane] = normal_quantile(uniform_open(words[lane]));
    }
  }
}

double BrownianSource::normal(std::uint64_t stream, std::uint64_t step, std::uint64_t coord,
                              std::uint64_t substep) const {
  const auto words = rng_.bits(stream, step, coord / 4, substep);
  return normal_quantile(uniform_open(words[coord % 4]));
}

void BrownianSource::normals(std::uint64_t stream, std::uint64_t step, std::uint64_t substep,
                             std::span<double> out) const {
  for (std::size_t block = 0; block * 4 < out.size(); ++block) {
    const auto words = rng_.bits(stream, step, block, substep);
    for (std::size_t lane = 0; lane < 4 && block * 4 + lane < out.size(); ++lane) {
      out[block * 4 + lane] = normal_quantile(uniform_open(words[lane]));
    }
  }
}

}  // namespace granular
