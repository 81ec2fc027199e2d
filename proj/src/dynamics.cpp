#include "granular/dynamics.hpp"

#include <vector>

namespace granular {

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::EulerMaruyama: return "euler_maruyama";
    case Scheme::TamedEuler: return "tamed_euler";
    case Scheme::AdaptiveEuler: return "adaptive_euler";
  }
  return "tamed_euler";
}

Scheme scheme_from_string(std::string_view name) {
  for (auto s : {Scheme::EulerMaruyama, Scheme::TamedEuler, Scheme::AdaptiveEuler}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

void StepPolicy::validate() const {
  if (!(dt > 0.0 && std::isfinite(dt))) throw std::invalid_argument("dt must be > 0");
  if (!(adaptive_drift_cap > 0.0)) throw std::invalid_argument("adaptive_drift_cap must be > 0");
  if (!(dt_min > 0.0)) throw std::invalid_argument("dt_min must be > 0");
  if (scheme == Scheme::AdaptiveEuler && dt_min > dt) throw std::invalid_argument("dt_min must not exceed dt");
}

namespace detail {

void throw_nonfinite(const char* what, Index i, Index j, double time) {
  std::ostringstream os;
  os << what << " at particle " << i;
  if (j >= 0) os << " (pair with " << j << ")";
  os << ", t = " << time;
  throw IntegrationError(os.str(), i, j, time);
}

}  // namespace detail

namespace {

void check_group(std::span<ParticleEnsemble* const> group) {
  if (group.empty()) throw std::invalid_argument("step_group needs at least one ensemble");
  const ParticleEnsemble& lead = *group.front();
  for (const ParticleEnsemble* e : group) {
    if (e->n() != lead.n() || e->dim() != lead.dim())
      throw std::invalid_argument("coupled ensembles must share N and d");
    if (e->centered != lead.centered) throw std::invalid_argument("coupled ensembles must agree on centering");
    if (e->steps_taken != lead.steps_taken) throw std::invalid_argument("coupled ensembles must share the step index");
    for (Index i = 0; i < lead.n(); ++i) {
      if (e->stream(i) != lead.stream(i))
        throw std::invalid_argument("coupled ensembles must share Brownian stream assignment");
    }
  }
}

}  // namespace

void step_group(std::span<ParticleEnsemble* const> group, const Potential& V, const Potential& W,
                const StepPolicy& policy, const BrownianSource& noise, int threads) {
  policy.validate();
  check_group(group);
  const ParticleEnsemble& lead = *group.front();
  const Index n = lead.n();
  const Index d = lead.dim();
  const auto step_index = static_cast<std::uint64_t>(lead.steps_taken);
  const bool adaptive = policy.scheme == Scheme::AdaptiveEuler;

  std::vector<Positions> drifts(group.size());
  Positions xi(n, d);
  double remaining = policy.dt;
  std::uint64_t substep = 0;
  while (remaining > 0.0) {
    const double elapsed = policy.dt - remaining;
    for (std::size_t g = 0; g < group.size(); ++g) {
      drifts[g] = drift(group[g]->positions, V, W, {threads, group[g]->time + elapsed});
    }

    double h = policy.dt;
    if (adaptive) {
      double worst = 0.0;
      Index worst_particle = 0;
      for (const Positions& b : drifts) {
        for (Index i = 0; i < n; ++i) {
          const double norm = b.row(i).norm();
          if (norm > worst) {
            worst = norm;
            worst_particle = i;
          }
        }
      }
      while (worst * h > policy.adaptive_drift_cap) {
        h *= 0.5;
        if (h < policy.dt_min) {
          std::ostringstream os;
          os << "adaptive step fell below dt_min = " << policy.dt_min << " at particle " << worst_particle
             << " with |b| = " << worst;
          throw StabilityError(os.str(), worst_particle, worst);
        }
      }
      h = std::min(h, remaining);
    }

    for (Index i = 0; i < n; ++i) {
      noise.normals(lead.stream(i), step_index, substep, std::span<double>(xi.row(i).data(), static_cast<std::size_t>(d)));
    }
    if (lead.centered) center_in_place(xi);
    const double scale = std::sqrt(2.0 * h);

    for (std::size_t g = 0; g < group.size(); ++g) {
      Positions& x = group[g]->positions;
      const Positions& b = drifts[g];
      if (policy.scheme == Scheme::TamedEuler) {
        for (Index i = 0; i < n; ++i) {
          const double factor = h / (1.0 + h * b.row(i).norm());
          x.row(i) += factor * b.row(i) + scale * xi.row(i);
        }
      } else {
        x += h * b + scale * xi;
      }
      if (group[g]->centered) center_in_place(x);
      if (!x.allFinite()) {
        for (Index i = 0; i < n; ++i)
          if (!x.row(i).allFinite())
            detail::throw_nonfinite("non-finite position after update", i, -1, group[g]->time + elapsed + h);
      }
    }

    remaining -= h;
    ++substep;
    if (!adaptive) break;
  }

  for (ParticleEnsemble* e : group) {
    e->time += policy.dt;
    e->steps_taken += 1;
  }
}

ParticleEnsemble step(const ParticleEnsemble& ensemble, const Potential& V, const Potential& W,
                      const StepPolicy& policy, const BrownianSource& noise, int threads) {
  ParticleEnsemble next = ensemble;
  ParticleEnsemble* group[] = {&next};
  step_group(group, V, W, policy, noise, threads);
  return next;
}

std::pair<ParticleEnsemble, ParticleEnsemble> step_coupled(const ParticleEnsemble& a, const ParticleEnsemble& b,
                                                           const Potential& V, const Potential& W,
                                                           const StepPolicy& policy, const BrownianSource& noise,
                                                           int threads) {
  std::pair<ParticleEnsemble, ParticleEnsemble> next{a, b};
  ParticleEnsemble* group[] = {&next.first, &next.second};
  step_group(group, V, W, policy, noise, threads);
  return next;
}

double coupled_distance_sq(const Positions& a, const Positions& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("coupled ensembles differ in shape");
  return (a - b).squaredNorm() / static_cast<double>(a.rows());
}

}  // namespace granular
