#pragma once

#include "granular/sim_config.hpp"

#include <functional>
#include <vector>

namespace granular {

struct Observables {
  double second_moment = 0.0;           // mean_i |x_i|^2
  double pairwise_second_moment = 0.0;  // mean_{i != j} |x_i - x_j|^2
  double center_of_mass = 0.0;          // |mean_i x_i|
  double max_norm = 0.0;                // max_i |x_i|
};

Observables observe(const Positions& x);

struct Snapshot {
  std::size_t run = 0;
  std::size_t index = 0;  // position in the observation grid
  ParticleEnsemble ensemble;
  Observables observables;
};

struct CoupledSnapshot {
  std::size_t run = 0;
  std::size_t index = 0;
  ParticleEnsemble a;
  ParticleEnsemble b;
  double xi = 0.0;  // (1/N) sum_i |a_i - b_i|^2
};

/// How a projected run is produced. Direct integrates the projected SDE;
/// ProjectRaw integrates the raw system and projects each snapshot. The two
/// agree in law, not pathwise.
enum class ProjectionRoute { Direct, ProjectRaw };

/// Initial ensemble of run `run` (already projected in projected mode).
ParticleEnsemble initial_ensemble(const SimConfig& config, std::size_t run);

/// All snapshots of one run, in observation order.
std::vector<Snapshot> simulate_run(const SimConfig& config, std::size_t run, int threads = 1,
                                   ProjectionRoute route = ProjectionRoute::Direct);

/// Runs `config.runs` independent runs (in parallel over runs) and hands
/// every snapshot to `sink`, run-major and in time order.
void simulate(const SimConfig& config, const std::function<void(const Snapshot&)>& sink, int threads = 1);

/// Builds the coupled pair of initial ensembles for run `run`.
std::pair<ParticleEnsemble, ParticleEnsemble> coupled_initial(const SimConfig& config, const InitialLaw& law_a,
                                                              const InitialLaw& law_b, Coupling coupling,
                                                              std::size_t run);

std::vector<CoupledSnapshot> coupled_run(const SimConfig& config, const InitialLaw& law_a, const InitialLaw& law_b,
                                         Coupling coupling, std::size_t run, int threads = 1);

/// Synchronous coupling of two copies driven by identical Brownian
/// increments, started from `coupling` of law_a and law_b.
void coupled_simulate(const SimConfig& config, const InitialLaw& law_a, const InitialLaw& law_b, Coupling coupling,
                      const std::function<void(const CoupledSnapshot&)>& sink, int threads = 1);

}  // namespace granular
