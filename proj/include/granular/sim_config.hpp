#pragma once

#include "granular/dynamics.hpp"
#include "granular/ensemble.hpp"
#include "granular/potential.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace granular {

enum class Mode { Raw, Projected };
enum class OutputFormat { Csv, Jsonl, Bin };
enum class Coupling { Independent, Comonotone, Optimal };
enum class TestFunction { ClampedCoordinate, ClampedNorm, SinCoordinate, Constant };

std::string_view to_string(Mode mode);
std::string_view to_string(OutputFormat format);
std::string_view to_string(Coupling coupling);
std::string_view to_string(TestFunction function);

/// Observation times: either an explicit list or `count` multiples of `stride`.
struct ObservationSpec {
  std::vector<double> times;
  double stride = 0.0;
  int count = 0;

  friend bool operator==(const ObservationSpec&, const ObservationSpec&) = default;
};

struct CheckSpec {
  long probes = 256;
  double extent = 4.0;
  std::uint64_t seed = 0;
  std::vector<double> eps_grid{0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.99};

  friend bool operator==(const CheckSpec&, const CheckSpec&) = default;
};

/// Parameters consumed by the experiment harnesses.
struct ExperimentSpec {
  std::vector<int> n_values{8, 16, 32, 64};
  int m_reference = 512;
  int runs_per_n = 32;
  Coupling coupling = Coupling::Independent;
  TestFunction function = TestFunction::ClampedCoordinate;
  double clamp_radius = std::numeric_limits<double>::infinity();
  double concentration_time = 5.0;
  std::vector<double> r_grid;
  int trials = 400;
  double chaos_K = 0.0;
  double delta = 0.1;

  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

/// Full description of a simulation or experiment.
struct SimConfig {
  Potential V = Potential::zero();
  Potential W = Potential::zero();
  Index n = 16;
  Index dim = 1;
  Mode mode = Mode::Raw;
  StepPolicy step;
  double horizon = 1.0;
  ObservationSpec observe;
  InitialLaw initial;
  InitialLaw initial_b;
  std::uint64_t seed = 0;
  int runs = 1;
  std::string output_directory = ".";
  std::vector<OutputFormat> formats{OutputFormat::Csv};
  CheckSpec checks;
  ExperimentSpec experiment;
};

bool operator==(const SimConfig& a, const SimConfig& b);

/// Observation points snapped to the step grid (nearest step not after the
/// requested time), deduplicated.
struct ObservationGrid {
  std::vector<std::int64_t> steps;
  std::vector<double> times;
  std::int64_t total_steps = 0;
};

ObservationGrid observation_grid(const SimConfig& config);

/// Seed of run `run` under master seed `seed`.
std::uint64_t run_seed(std::uint64_t seed, std::uint64_t run);

}  // namespace granular
