#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace granular {

/// Philox4x64-10 counter-based generator (Salmon et al., Random123). A pure
/// function of (counter, key); no state is carried between calls.
struct Philox4x64 {
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Counter generate(Counter counter, Key key);
};

/// Independent sub-seed derivation (splitmix64 finaliser over seed and tag).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

/// Maps 64 random bits to a double in the open interval (0, 1).
double uniform_open(std::uint64_t bits);

/// Standard normal quantile of a uniform in (0, 1).
double normal_quantile(double u);

/// Domains keep the different consumers of one seed on disjoint counters.
enum class RngDomain : std::uint64_t {
  Brownian = 0x42726f776e69616eULL,
  Initial = 0x496e697469616c00ULL,
  Probe = 0x50726f6265000000ULL,
  Sliced = 0x536c696365640000ULL,
};

/// Counter-keyed uniforms and normals: value(seed, domain, a, b, c, lane).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, RngDomain domain) : key_{seed, static_cast<std::uint64_t>(domain)} {}

  /// Four raw 64-bit words for the counter (a, b, c, d).
  Philox4x64::Counter bits(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d = 0) const {
    return Philox4x64::generate({a, b, c, d}, key_);
  }

  double uniform(std::uint64_t a, std::uint64_t b, std::uint64_t index) const;
  double normal(std::uint64_t a, std::uint64_t b, std::uint64_t index) const;
  void normals(std::uint64_t a, std::uint64_t b, std::span<double> out) const;

 private:
  Philox4x64::Key key_;
};

/// Brownian increments addressed by (stream, step, coordinate, substep).
/// The same address always yields the same standard normal, whatever the
/// evaluation order or thread count.
class BrownianSource {
 public:
  explicit BrownianSource(std::uint64_t seed) : seed_(seed), rng_(seed, RngDomain::Brownian) {}

  std::uint64_t seed() const { return seed_; }

  double normal(std::uint64_t stream, std::uint64_t step, std::uint64_t coord,
                std::uint64_t substep = 0) const;

  /// Fills out[k] with the increment of coordinate k.
  void normals(std::uint64_t stream, std::uint64_t step, std::uint64_t substep, std::span<double> out) const;

 private:
  std::uint64_t seed_;
  CounterRng rng_;
};

}  // namespace granular
