#include "granular/conditions.hpp"

#include "granular/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace granular {

namespace {

// Per-probe quantities shared by the checkers.
struct Observed {
  std::vector<double> u2;   // |x - y|^2
  std::vector<double> dot;  // (x - y).(grad W(x) - grad W(y))
};

Observed observe_pairs(const Potential& w, const Positions& x, const Positions& y) {
  Observed o;
  const Index n = x.rows();
  o.u2.resize(static_cast<std::size_t>(n));
  o.dot.resize(static_cast<std::size_t>(n));
  Vector gx(x.cols()), gy(x.cols());
  for (Index k = 0; k < n; ++k) {
    grad_to(w, x.row(k).transpose(), gx);
    grad_to(w, y.row(k).transpose(), gy);
    const auto diff = (x.row(k) - y.row(k)).transpose();
    o.u2[static_cast<std::size_t>(k)] = diff.squaredNorm();
    o.dot[static_cast<std::size_t>(k)] = diff.dot(gx - gy);
  }
  return o;
}

void require_probe_args(long probes, double extent) {
  if (probes < 1) throw std::invalid_argument("probes must be >= 1");
  if (!(extent > 0.0) || !std::isfinite(extent)) throw std::invalid_argument("probe extent must be > 0");
}

ConditionReport make_report(std::string name, long probes, double extent) {
  ConditionReport r;
  r.condition_name = std::move(name);
  r.probe_count = probes;
  r.probe_extent = extent;
  return r;
}

// max(0, max_k lambda u2_k - dot_k)
double core_constant(const Observed& o, double lambda) {
  double c = 0.0;
  for (std::size_t k = 0; k < o.u2.size(); ++k) c = std::max(c, lambda * o.u2[k] - o.dot[k]);
  return c;
}

}  // namespace

double ConditionReport::tolerance() const {
  const auto it = fitted_constants.find("tolerance");
  return it == fitted_constants.end() ? 0.0 : it->second;
}

ProbePairs make_probe_pairs(long probes, double extent, Index dim, std::uint64_t seed) {
  require_probe_args(probes, extent);
  if (dim < 1) throw std::invalid_argument("probe dimension must be >= 1");
  const Index n = probes;
  const Index near = n / 4;
  const Index dims = 2 * dim;

  // Kronecker steps 1/phi^k with phi the root of x^(D+1) = x + 1
  double phi = 2.0;
  for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / static_cast<double>(dims + 1));
  const CounterRng rng(seed, RngDomain::Probe);
  std::vector<double> step(static_cast<std::size_t>(dims)), shift(static_cast<std::size_t>(dims));
  for (Index k = 0; k < dims; ++k) {
    step[static_cast<std::size_t>(k)] = std::fmod(std::pow(1.0 / phi, static_cast<double>(k + 1)), 1.0);
    shift[static_cast<std::size_t>(k)] = rng.uniform(0, 0, static_cast<std::uint64_t>(k));
  }
  auto coordinate = [&](Index point, Index k) {
    const auto sk = static_cast<std::size_t>(k);
    const double frac = std::fmod(shift[sk] + static_cast<double>(point + 1) * step[sk], 1.0);
    return extent * (2.0 * frac - 1.0);
  };

  static constexpr double kNearOffsets[] = {1e-4, 1e-3, 1e-2, 1e-1, 0.5};
  ProbePairs pairs{Positions(n, dim), Positions(n, dim)};
  for (Index p = 0; p < n; ++p) {
    for (Index k = 0; k < dim; ++k) {
      pairs.x(p, k) = coordinate(p, k);
      pairs.y(p, k) = coordinate(p, dim + k);
    }
    if (p >= n - near) {
      const Index j = p - (n - near);
      pairs.y.row(p) = pairs.x.row(p);
      pairs.y(p, j % dim) += kNearOffsets[j % 5];
    }
  }
  return pairs;
}

ConditionReport check_condition_C(const Potential& w, double A, double alpha, long probes, double extent,
                                  const std::vector<double>& eps_grid, const ProbeOptions& options) {
  require_probe_args(probes, extent);
  if (!(A >= 0.0) || !(alpha >= 0.0)) throw std::invalid_argument("condition C needs A >= 0 and alpha >= 0");
  if (eps_grid.empty()) throw std::invalid_argument("eps_grid must not be empty");
  for (double e : eps_grid)
    if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("every eps must lie in (0, 1)");

  const ProbePairs pairs = make_probe_pairs(probes, extent, options.dim, options.seed);
  const Observed o = observe_pairs(w, pairs.x, pairs.y);
  double worst = -std::numeric_limits<double>::infinity();
  double max_bound = 0.0;
  double a_max = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < o.u2.size(); ++k) {
    for (double eps : eps_grid) {
      const double scale = std::pow(eps, alpha) * (o.u2[k] - eps * eps);
      const double bound = A * scale;
      worst = std::max(worst, bound - o.dot[k]);
      max_bound = std::max(max_bound, std::abs(bound));
      if (scale > 0.0) a_max = std::min(a_max, o.dot[k] / scale);
    }
  }
  ConditionReport r = make_report("C_A_alpha", probes, extent);
  r.fitted_constants = {{"A", A},
                        {"alpha", alpha},
                        {"A_max", a_max},
                        {"tolerance", options.relative_tolerance * (1.0 + max_bound)}};
  r.worst_violation = worst;
  return r;
}

ConditionReport check_convexity_at_infinity(const Potential& w, long probes, double extent,
                                            const ProbeOptions& options) {
  require_probe_args(probes, extent);
  const ProbePairs pairs = make_probe_pairs(probes, extent, options.dim, options.seed);
  const Observed full = observe_pairs(w, pairs.x, pairs.y);
  const Observed half = observe_pairs(w, pairs.x * 0.5, pairs.y * 0.5);
  const double rel = options.relative_tolerance;
  const double c_zero = core_constant(full, 0.0);

  auto accepted = [&](double lambda) {
    const double c = core_constant(full, lambda);
    const double tol = rel * (1.0 + c);
    return c <= 1.5 * core_constant(half, lambda) + tol && c <= lambda + c_zero + tol;
  };

  std::vector<double> grid{0.0};
  for (int k = 0; k <= 60; ++k) grid.push_back(std::pow(10.0, -3.0 + 0.1 * k));
  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (accepted(grid[k])) best = k;
  double lambda = grid[best];
  if (best + 1 < grid.size()) {
    double lo = lambda;
    double hi = grid[best + 1];
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      (accepted(mid) ? lo : hi) = mid;
    }
    lambda = lo;
  }
  const double c = core_constant(full, lambda);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < full.u2.size(); ++k) worst = std::max(worst, lambda * full.u2[k] - c - full.dot[k]);

  ConditionReport r = make_report("A4_conv_at_infinity", probes, extent);
  r.fitted_constants = {{"lambda", lambda}, {"C", c}, {"tolerance", rel * (1.0 + c)}};
  r.worst_violation = worst;
  return r;
}

ConditionReport check_convexity_at_infinity(const Potential& w, double lambda, double C, long probes,
                                            double extent, const ProbeOptions& options) {
  require_probe_args(probes, extent);
  const ProbePairs pairs = make_probe_pairs(probes, extent, options.dim, options.seed);
  const Observed o = observe_pairs(w, pairs.x, pairs.y);
  double worst = -std::numeric_limits<double>::infinity();
  double max_bound = 0.0;
  for (std::size_t k = 0; k < o.u2.size(); ++k) {
    const double bound = lambda * o.u2[k] - C;
    worst = std::max(worst, bound - o.dot[k]);
    max_bound = std::max(max_bound, std::abs(bound));
  }
  ConditionReport r = make_report("A4_conv_at_infinity", probes, extent);
  r.fitted_constants = {{"lambda", lambda}, {"C", C}, {"tolerance", options.relative_tolerance * (1.0 + max_bound)}};
  r.worst_violation = worst;
  return r;
}

ConditionReport check_polynomial_growth(const Potential& w, int m, long probes, double extent,
                                        const ProbeOptions& options) {
  require_probe_args(probes, extent);
  if (m < 0) throw std::invalid_argument("growth exponent m must be >= 0");
  const ProbePairs pairs = make_probe_pairs(probes, extent, options.dim, options.seed);

  auto fit = [&](double scale) {
    double c_hat = 0.0;
    Vector gx(pairs.x.cols()), gy(pairs.x.cols());
    for (Index k = 0; k < pairs.x.rows(); ++k) {
      const Vector x = scale * pairs.x.row(k).transpose();
      const Vector y = scale * pairs.y.row(k).transpose();
      const double u = (x - y).norm();
      if (u == 0.0) continue;
      grad_to(w, x, gx);
      grad_to(w, y, gy);
      const double weight = std::min(u, 1.0) * (1.0 + std::pow(x.norm(), m) + std::pow(y.norm(), m));
      c_hat = std::max(c_hat, (gx - gy).norm() / weight);
    }
    return c_hat;
  };
  const double c_full = fit(1.0);
  const double c_half = fit(0.5);

  ConditionReport r = make_report("A3", probes, extent);
  r.fitted_constants = {{"C_hat", c_full},
                        {"C_hat_half", c_half},
                        {"m", static_cast<double>(m)},
                        {"tolerance", options.relative_tolerance * (1.0 + c_full)}};
  r.worst_violation = c_full - 1.5 * c_half;
  return r;
}

}  // namespace granular
