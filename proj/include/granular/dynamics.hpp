#pragma once

#include "granular/ensemble.hpp"
#include "granular/parallel.hpp"
#include "granular/potential.hpp"
#include "granular/rng.hpp"

#include <cmath>
#include <span>
#include <sstream>
#include <string_view>
#include <utility>

namespace granular {

enum class Scheme { EulerMaruyama, TamedEuler, AdaptiveEuler };

std::string_view to_string(Scheme scheme);
Scheme scheme_from_string(std::string_view name);

/// How one step of length dt is taken.
///
/// TamedEuler uses the per-particle factor 1 / (1 + dt |b_i|). AdaptiveEuler
/// halves the local step until max_i |b_i| * dt_local <= adaptive_drift_cap,
/// never going below dt_min.
struct StepPolicy {
  Scheme scheme = Scheme::TamedEuler;
  double dt = 0.01;
  double adaptive_drift_cap = 0.5;
  double dt_min = 1e-8;

  void validate() const;

  friend bool operator==(const StepPolicy&, const StepPolicy&) = default;
};

struct DriftOptions {
  int threads = 1;
  double time = 0.0;  // reported in IntegrationError
};

namespace detail {

inline Index pair_slot(Index n, Index i, Index j) { return i * (2 * n - i - 1) / 2 + (j - i - 1); }

[[noreturn]] void throw_nonfinite(const char* what, Index i, Index j, double time);

// Parallel only pays off once the pair count dwarfs thread start-up.
constexpr Index kParallelDriftMinParticles = 128;

}  // namespace detail

/// Mean-field drift: row i is
///   -grad V(x_i) - (1/N) sum_j grad W(x_i - x_j).
/// Each unordered pair is evaluated once (grad W is odd) and every row is
/// summed in fixed j order, so the result does not depend on `threads`.
template <typename Derived>
PositionsT<typename Derived::Scalar> drift(const Eigen::MatrixBase<Derived>& x, const Potential& V,
                                           const Potential& W, const DriftOptions& options = {}) {
  using Scalar = typename Derived::Scalar;
  const Index n = x.rows();
  const Index d = x.cols();
  const int threads = n >= detail::kParallelDriftMinParticles ? options.threads : 1;
  PositionsT<Scalar> out(n, d);

  for (Index i = 0; i < n; ++i) {
    if (!x.row(i).allFinite()) detail::throw_nonfinite("non-finite position", i, -1, options.time);
  }

  if (V.is_zero()) {
    out.setZero();
  } else {
    for (Index i = 0; i < n; ++i) {
      grad_to(V, x.row(i), out.row(i));
      if (!out.row(i).allFinite()) detail::throw_nonfinite("non-finite confinement gradient", i, -1, options.time);
    }
    out = -out;
  }

  if (!W.is_zero() && n > 1) {
    PositionsT<Scalar> pairs(n * (n - 1) / 2, d);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t ii) {
      const auto i = static_cast<Index>(ii);
      for (Index j = i + 1; j < n; ++j) {
        auto g = pairs.row(detail::pair_slot(n, i, j));
        grad_to(W, x.row(i) - x.row(j), g);
      }
    });
    if (!pairs.allFinite()) {
      for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
          if (!pairs.row(detail::pair_slot(n, i, j)).allFinite())
            detail::throw_nonfinite("non-finite interaction gradient", i, j, options.time);
    }
    const Scalar inv_n = Scalar(1) / Scalar(n);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t ii) {
      const auto i = static_cast<Index>(ii);
      VectorT<Scalar> acc = VectorT<Scalar>::Zero(d);
      for (Index j = 0; j < i; ++j) acc -= pairs.row(detail::pair_slot(n, j, i)).transpose();
      for (Index j = i + 1; j < n; ++j) acc += pairs.row(detail::pair_slot(n, i, j)).transpose();
      out.row(i) -= inv_n * acc.transpose();
    });
  }

  if (!out.allFinite()) {
    for (Index i = 0; i < n; ++i)
      if (!out.row(i).allFinite()) detail::throw_nonfinite("non-finite drift", i, -1, options.time);
  }
  return out;
}

/// One step of the particle system. A centered ensemble follows the
/// projected dynamics: its noise is (I - 11^T/N)-projected and its positions
/// are re-centered after the update.
ParticleEnsemble step(const ParticleEnsemble& ensemble, const Potential& V, const Potential& W,
                      const StepPolicy& policy, const BrownianSource& noise, int threads = 1);

/// Advances every ensemble of `group` by one step on shared Brownian
/// increments. Members must agree on N, d, stream assignment and centering.
/// Under AdaptiveEuler the sub-step schedule is common to the group, so a
/// synchronous coupling stays synchronous.
void step_group(std::span<ParticleEnsemble* const> group, const Potential& V, const Potential& W,
                const StepPolicy& policy, const BrownianSource& noise, int threads = 1);

/// Synchronous coupling: both ensembles use identical increments.
std::pair<ParticleEnsemble, ParticleEnsemble> step_coupled(const ParticleEnsemble& a, const ParticleEnsemble& b,
                                                           const Potential& V, const Potential& W,
                                                           const StepPolicy& policy, const BrownianSource& noise,
                                                           int threads = 1);

/// (1/N) sum_i |a_i - b_i|^2.
double coupled_distance_sq(const Positions& a, const Positions& b);

}  // namespace granular
