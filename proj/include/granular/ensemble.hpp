#pragma once

#include "granular/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace granular {

struct RngLineage {
  std::uint64_t seed = 0;
  std::uint64_t stream_offset = 0;

  friend bool operator==(const RngLineage&, const RngLineage&) = default;
};

/// N particles in R^d at one time point.
///
/// Particle i draws its Brownian increments from stream
/// `lineage.stream_offset + i` unless `stream_ids` overrides the assignment.
/// A `centered` ensemble is a projected one: its coordinate-wise mean is kept
/// at zero by every step.
struct ParticleEnsemble {
  Positions positions;
  double time = 0.0;
  std::int64_t steps_taken = 0;
  bool centered = false;
  RngLineage lineage;
  std::vector<std::uint64_t> stream_ids;

  Index n() const { return positions.rows(); }
  Index dim() const { return positions.cols(); }
  std::uint64_t stream(Index i) const {
    return stream_ids.empty() ? lineage.stream_offset + static_cast<std::uint64_t>(i)
                              : stream_ids[static_cast<std::size_t>(i)];
  }
};

/// Builds an ensemble at time 0; requires N >= 2, d >= 1 and finite entries.
ParticleEnsemble make_ensemble(Positions positions, RngLineage lineage = {});

/// Subtracts the ensemble mean from every particle and marks it centered.
ParticleEnsemble project(ParticleEnsemble ensemble);

/// Subtracts the coordinate-wise mean in place.
void center_in_place(Positions& positions);

enum class InitialKind { Gaussian, Uniform, TwoPoint, SampleFile };

std::string_view to_string(InitialKind kind);
InitialKind initial_kind_from_string(std::string_view name);

/// Initial law mu_0. Vector parameters of size 1 are broadcast to every
/// coordinate.
struct InitialLaw {
  InitialKind kind = InitialKind::Gaussian;
  Vector mean = Vector::Zero(1);
  double variance = 1.0;
  double half_width = 1.0;
  Vector point_a = Vector::Zero(1);
  Vector point_b = Vector::Zero(1);
  double weight = 0.5;  // probability of point_a
  std::string path;
  bool center_to_zero = false;
};

bool operator==(const InitialLaw& a, const InitialLaw& b);

/// Draws N particles from `law`. Particle i uses counter stream
/// `stream_offset + i` of (seed, law_tag), so particle i's draw does not
/// depend on N.
Positions sample_initial(const InitialLaw& law, Index n, Index dim, std::uint64_t seed,
                         std::uint64_t law_tag = 0, std::uint64_t stream_offset = 0);

/// Reads whitespace-separated rows (one particle per line, '#' comments).
Positions read_sample_file(const std::string& path, Index dim);

}  // namespace granular
