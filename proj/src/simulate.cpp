#include "granular/simulate.hpp"

#include "granular/metrics.hpp"
#include "granular/rng.hpp"

#include <algorithm>
#include <numeric>

namespace granular {

namespace {

constexpr std::uint64_t kLawTagA = 0;
constexpr std::uint64_t kLawTagB = 1;

void require_valid_for_run(const SimConfig& config) {
  if (config.n < 2) throw std::invalid_argument("N must be >= 2");
  if (config.dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (config.mode == Mode::Projected && !config.V.is_zero())
    throw std::invalid_argument("projected mode requires V = zero");
  config.step.validate();
}

}  // namespace

std::uint64_t run_seed(std::uint64_t seed, std::uint64_t run) { return derive_seed(seed, run); }

ObservationGrid observation_grid(const SimConfig& config) {
  ObservationGrid grid;
  const double dt = config.step.dt;
  grid.total_steps = static_cast<std::int64_t>(std::floor(config.horizon / dt + 1e-9));
  std::vector<double> requested = config.observe.times;
  if (requested.empty()) {
    if (config.observe.count > 0) {
      for (int k = 0; k < config.observe.count; ++k) requested.push_back(k * config.observe.stride);
    } else {
      requested = {0.0, config.horizon};
    }
  }
  for (double t : requested) {
    const auto k = std::min(grid.total_steps, static_cast<std::int64_t>(std::floor(t / dt + 1e-9)));
    if (grid.steps.empty() || grid.steps.back() != k) {
      grid.steps.push_back(k);
      grid.times.push_back(static_cast<double>(k) * dt);
    }
  }
  return grid;
}

Observables observe(const Positions& x) {
  Observables o;
  const Index n = x.rows();
  const Eigen::VectorXd norms2 = x.rowwise().squaredNorm();
  o.second_moment = norms2.mean();
  o.max_norm = std::sqrt(norms2.maxCoeff());
  o.center_of_mass = x.colwise().mean().norm();
  // sum_{i,j} |x_i - x_j|^2 = 2 N sum_i |x_i|^2 - 2 |sum_i x_i|^2
  const double total = 2.0 * static_cast<double>(n) * norms2.sum() - 2.0 * x.colwise().sum().squaredNorm();
  o.pairwise_second_moment = std::max(0.0, total) / static_cast<double>(n * (n - 1));
  return o;
}

ParticleEnsemble initial_ensemble(const SimConfig& config, std::size_t run) {
  require_valid_for_run(config);
  const std::uint64_t seed = run_seed(config.seed, run);
  ParticleEnsemble e =
      make_ensemble(sample_initial(config.initial, config.n, config.dim, seed, kLawTagA), RngLineage{seed, 0});
  if (config.mode == Mode::Projected) e = project(std::move(e));
  return e;
}

std::vector<Snapshot> simulate_run(const SimConfig& config, std::size_t run, int threads, ProjectionRoute route) {
  ParticleEnsemble e = initial_ensemble(config, run);
  const bool project_after = route == ProjectionRoute::ProjectRaw && config.mode == Mode::Projected;
  if (project_after) e.centered = false;
  const BrownianSource noise(e.lineage.seed);
  const ObservationGrid grid = observation_grid(config);
  std::vector<Snapshot> out;
  out.reserve(grid.steps.size());
  std::size_t next = 0;
  auto emit = [&] {
    while (next < grid.steps.size() && grid.steps[next] == e.steps_taken) {
      Snapshot s{run, next, project_after ? project(e) : e, {}};
      s.ensemble.time = grid.times[next];
      s.observables = observe(s.ensemble.positions);
      out.push_back(std::move(s));
      ++next;
    }
  };
  emit();
  while (e.steps_taken < grid.total_steps && next < grid.steps.size()) {
    e = step(e, config.V, config.W, config.step, noise, threads);
    emit();
  }
  return out;
}

void simulate(const SimConfig& config, const std::function<void(const Snapshot&)>& sink, int threads) {
  const auto runs = static_cast<std::size_t>(std::max(config.runs, 1));
  std::vector<std::vector<Snapshot>> all(runs);
  if (runs == 1) {
    all[0] = simulate_run(config, 0, threads);
  } else {
    parallel_for(runs, threads, [&](std::size_t r) { all[r] = simulate_run(config, r, 1); });
  }
  for (const auto& run : all)
    for (const auto& s : run) sink(s);
}

std::pair<ParticleEnsemble, ParticleEnsemble> coupled_initial(const SimConfig& config, const InitialLaw& law_a,
                                                              const InitialLaw& law_b, Coupling coupling,
                                                              std::size_t run) {
  require_valid_for_run(config);
  const std::uint64_t seed = run_seed(config.seed, run);
  Positions a = sample_initial(law_a, config.n, config.dim, seed, kLawTagA);
  Positions b = sample_initial(law_b, config.n, config.dim, seed, kLawTagB);
  switch (coupling) {
    case Coupling::Independent:
      break;
    case Coupling::Comonotone: {
      if (config.dim != 1) throw std::invalid_argument("comonotone coupling needs d = 1");
      std::sort(a.data(), a.data() + a.size());
      std::sort(b.data(), b.data() + b.size());
      break;
    }
    case Coupling::Optimal: {
      const Assignment match = solve_assignment(pairwise_cost(a, b, 2));
      Positions reordered(b.rows(), b.cols());
      for (Index i = 0; i < a.rows(); ++i) reordered.row(i) = b.row(match.column_of_row[static_cast<std::size_t>(i)]);
      b = std::move(reordered);
      break;
    }
  }
  ParticleEnsemble ea = make_ensemble(std::move(a), RngLineage{seed, 0});
  ParticleEnsemble eb = make_ensemble(std::move(b), RngLineage{seed, 0});
  if (config.mode == Mode::Projected) {
    ea = project(std::move(ea));
    eb = project(std::move(eb));
  }
  return {std::move(ea), std::move(eb)};
}

std::vector<CoupledSnapshot> coupled_run(const SimConfig& config, const InitialLaw& law_a, const InitialLaw& law_b,
                                         Coupling coupling, std::size_t run, int threads) {
  auto [a, b] = coupled_initial(config, law_a, law_b, coupling, run);
  const BrownianSource noise(a.lineage.seed);
  const ObservationGrid grid = observation_grid(config);
  std::vector<CoupledSnapshot> out;
  out.reserve(grid.steps.size());
  std::size_t next = 0;
  auto emit = [&] {
    while (next < grid.steps.size() && grid.steps[next] == a.steps_taken) {
      CoupledSnapshot s{run, next, a, b, coupled_distance_sq(a.positions, b.positions)};
      s.a.time = s.b.time = grid.times[next];
      out.push_back(std::move(s));
      ++next;
    }
  };
  emit();
  ParticleEnsemble* group[] = {&a, &b};
  while (a.steps_taken < grid.total_steps && next < grid.steps.size()) {
    step_group(group, config.V, config.W, config.step, noise, threads);
    emit();
  }
  return out;
}

void coupled_simulate(const SimConfig& config, const InitialLaw& law_a, const InitialLaw& law_b, Coupling coupling,
                      const std::function<void(const CoupledSnapshot&)>& sink, int threads) {
  const auto runs = static_cast<std::size_t>(std::max(config.runs, 1));
  std::vector<std::vector<CoupledSnapshot>> all(runs);
  parallel_for(runs, threads, [&](std::size_t r) { all[r] = coupled_run(config, law_a, law_b, coupling, r, 1); });
  for (const auto& run : all)
    for (const auto& s : run) sink(s);
}

}  // namespace granular
