#include "granular/experiments.hpp"

#include "granular/conditions.hpp"
#include "granular/parallel.hpp"
#include "granular/rng.hpp"
#include "granular/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace granular {

namespace {

// Streams and initial draws of the auxiliary system stay clear of the
// N-particle system, whatever N.
constexpr std::uint64_t kAuxStreamOffset = 1ULL << 32;
constexpr std::uint64_t kAuxLawTag = 2;
constexpr std::uint64_t kTaggedStream = 1;

void euler_update(Vector& x, const Vector& b, const Vector& xi, const StepPolicy& policy) {
  const double h = policy.dt;
  const double factor = policy.scheme == Scheme::TamedEuler ? h / (1.0 + h * b.norm()) : h;
  x += factor * b + std::sqrt(2.0 * h) * xi;
}

Vector proxy_drift(const Vector& x, const Positions& aux, const Potential& V, const Potential& W) {
  const Index d = x.size();
  Vector b = Vector::Zero(d);
  Vector g(d);
  if (!V.is_zero()) {
    grad_to(V, x, g);
    b -= g;
  }
  if (!W.is_zero()) {
    Vector acc = Vector::Zero(d);
    for (Index j = 0; j < aux.rows(); ++j) {
      grad_to(W, x - aux.row(j).transpose(), g);
      acc += g;
    }
    b -= acc / static_cast<double>(aux.rows());
  }
  return b;
}

// Positions of the mean-field proxy at every snapshot of `grid`.
std::vector<Vector> proxy_path(const SimConfig& config, std::uint64_t seed, int m, const ObservationGrid& grid) {
  const Index d = config.dim;
  ParticleEnsemble aux = make_ensemble(sample_initial(config.initial, m, d, seed, kAuxLawTag, kAuxStreamOffset),
                                       RngLineage{seed, kAuxStreamOffset});
  if (config.mode == Mode::Projected) aux = project(std::move(aux));
  Vector x = sample_initial(config.initial, 1, d, seed, 0, kTaggedStream).row(0).transpose();
  const BrownianSource noise(seed);
  std::vector<Vector> path;
  path.reserve(grid.steps.size());
  Vector xi(d);
  std::size_t next = 0;
  for (std::int64_t k = 0;; ++k) {
    while (next < grid.steps.size() && grid.steps[next] == k) {
      path.push_back(x);
      ++next;
    }
    if (k >= grid.total_steps || next == grid.steps.size()) break;
    const Vector b = proxy_drift(x, aux.positions, config.V, config.W);
    noise.normals(kTaggedStream, static_cast<std::uint64_t>(k), 0, std::span<double>(xi.data(), static_cast<std::size_t>(d)));
    aux = step(aux, config.V, config.W, config.step, noise);
    euler_update(x, b, xi, config.step);
    if (!x.allFinite()) detail::throw_nonfinite("non-finite mean-field proxy", 0, -1, static_cast<double>(k + 1) * config.step.dt);
  }
  return path;
}

// |Y^1_t - path(t)|^2 at every snapshot for the N-particle system.
std::vector<double> tagged_errors(const SimConfig& config, Index n, std::uint64_t seed, const ObservationGrid& grid,
                                  const std::vector<Vector>& path) {
  ParticleEnsemble e =
      make_ensemble(sample_initial(config.initial, n, config.dim, seed, 0, kTaggedStream), RngLineage{seed, kTaggedStream});
  if (config.mode == Mode::Projected) e = project(std::move(e));
  const BrownianSource noise(seed);
  std::vector<double> out;
  out.reserve(grid.steps.size());
  std::size_t next = 0;
  for (;;) {
    while (next < grid.steps.size() && grid.steps[next] == e.steps_taken) {
      out.push_back((e.positions.row(0).transpose() - path[next]).squaredNorm());
      ++next;
    }
    if (e.steps_taken >= grid.total_steps || next == grid.steps.size()) break;
    e = step(e, config.V, config.W, config.step, noise);
  }
  return out;
}

struct Column {
  std::vector<double> mean;
  std::vector<double> std_error;
};

// Column-wise mean and standard error of rows[run][k].
Column across_runs(const std::vector<std::vector<double>>& rows) {
  const std::size_t width = rows.empty() ? 0 : rows.front().size();
  Column c{std::vector<double>(width), std::vector<double>(width)};
  std::vector<double> column(rows.size());
  for (std::size_t k = 0; k < width; ++k) {
    for (std::size_t r = 0; r < rows.size(); ++r) column[r] = rows[r][k];
    c.mean[k] = mean(column);
    c.std_error[k] = standard_error(column);
  }
  return c;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

void fit_exponential(DecayResult& r, double lo, double hi) {
  std::vector<double> t, y;
  const double floor = r.xi.front() * 1e-20;
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    if (r.times[k] >= lo && r.times[k] <= hi && r.xi[k] > floor && r.xi[k] > 0.0) {
      t.push_back(r.times[k]);
      y.push_back(std::log(r.xi[k]));
    }
  }
  r.exp_window_lo = lo;
  r.exp_window_hi = hi;
  r.exp_points = static_cast<long>(t.size());
  if (t.size() < 2) {
    r.fit_skipped = true;
    return;
  }
  r.exp_rate = -least_squares(t, y).slope;
}

double beta_envelope(double w0_sq, double A, double alpha, double t) {
  if (!(w0_sq > 0.0)) return 0.0;
  if (alpha == 0.0) return w0_sq * std::exp(-2.0 * A * t);
  return std::pow(std::pow(w0_sq, -alpha / 2.0) + decay_B_alpha(A, alpha) * t, -2.0 / alpha);
}

}  // namespace

// ---------------------------------------------------------------------------

ChaosScanResult chaos_scan(const SimConfig& config, const std::vector<int>& n_values, int m_reference,
                           int runs_per_n, int threads) {
  if (n_values.empty()) throw std::invalid_argument("chaos_scan needs at least one N");
  for (std::size_t k = 0; k < n_values.size(); ++k) {
    if (n_values[k] < 2) throw std::invalid_argument("chaos_scan needs N >= 2");
    if (k > 0 && n_values[k] <= n_values[k - 1]) throw std::invalid_argument("chaos_scan N values must increase");
  }
  const int n_max = n_values.back();
  if (m_reference < 8 * n_max) {
    std::ostringstream os;
    os << "M_reference = " << m_reference << " must be at least 8 * max N = " << 8 * n_max;
    throw std::invalid_argument(os.str());
  }
  if (runs_per_n < 2) throw std::invalid_argument("chaos_scan needs at least two runs per N");
  if (config.step.scheme == Scheme::AdaptiveEuler)
    throw std::invalid_argument("chaos_scan couples on a fixed step grid; use euler_maruyama or tamed_euler");
  config.step.validate();

  const ObservationGrid grid = observation_grid(config);
  const std::size_t nn = n_values.size();
  const auto runs = static_cast<std::size_t>(runs_per_n);
  const std::size_t doubling = std::min<std::size_t>(8, runs);

  // errors[n][run][time]
  std::vector<std::vector<std::vector<double>>> errors(nn, std::vector<std::vector<double>>(runs));
  std::vector<std::vector<double>> doubled(doubling);
  parallel_for(runs + doubling, threads, [&](std::size_t job) {
    if (job < runs) {
      const std::uint64_t seed = run_seed(config.seed, job);
      const std::vector<Vector> path = proxy_path(config, seed, m_reference, grid);
      for (std::size_t k = 0; k < nn; ++k) errors[k][job] = tagged_errors(config, n_values[k], seed, grid, path);
    } else {
      const std::size_t r = job - runs;
      const std::uint64_t seed = run_seed(config.seed, r);
      const std::vector<Vector> path = proxy_path(config, seed, 2 * m_reference, grid);
      doubled[r] = tagged_errors(config, n_max, seed, grid, path);
    }
  });

  ChaosScanResult res;
  res.n_values = n_values;
  res.m_reference = m_reference;
  res.runs_per_n = runs_per_n;
  res.times = grid.times;
  const double alpha = config.W.declared_alpha;
  res.predicted_slope = -1.0 / (1.0 + alpha);
  std::vector<double> log_n, log_e;
  for (std::size_t k = 0; k < nn; ++k) {
    const Column c = across_runs(errors[k]);
    const std::size_t at = argmax(c.mean);
    res.errors.push_back(c.mean[at]);
    res.std_errors.push_back(c.std_error[at]);
    res.argmax_times.push_back(grid.times[at]);
    double late = 0.0;
    for (std::size_t t = 0; t < c.mean.size(); ++t)
      if (grid.times[t] > 0.0) late = std::max(late, c.mean[t]);
    res.dynamic_errors.push_back(late);
    log_n.push_back(std::log(static_cast<double>(n_values[k])));
    log_e.push_back(std::log(std::max(c.mean[at], std::numeric_limits<double>::min())));
    res.fitted_K = std::max(res.fitted_K, c.mean[at] * std::pow(static_cast<double>(n_values[k]), -res.predicted_slope));
  }
  if (nn >= 2) {
    const LinearFit fit = least_squares(log_n, log_e);
    res.fitted_slope = fit.slope;
    res.fitted_intercept = fit.intercept;
  }
  res.decreasing = true;
  for (std::size_t k = 1; k < nn; ++k) {
    const double slack = 2.0 * std::hypot(res.std_errors[k], res.std_errors[k - 1]);
    if (!(res.errors[k] < res.errors[k - 1] + slack)) res.decreasing = false;
  }

  res.doubling_runs = static_cast<int>(doubling);
  std::vector<std::vector<double>> base(errors.back().begin(), errors.back().begin() + static_cast<std::ptrdiff_t>(doubling));
  const Column with_m = across_runs(base);
  const Column with_2m = across_runs(doubled);
  const double e_m = with_m.mean[argmax(with_m.mean)];
  const double e_2m = with_2m.mean[argmax(with_2m.mean)];
  res.proxy_bias = e_m > 0.0 ? std::abs(e_m - e_2m) / e_m : 0.0;
  if (res.proxy_bias >= 0.2) {
    res.proxy_warning = true;
    std::ostringstream os;
    os << "reference size M = " << m_reference << " may be too small: doubling M changes the error at N = " << n_max
       << " by " << 100.0 * res.proxy_bias << "%";
    res.warnings.push_back(os.str());
  }
  return res;
}

// ---------------------------------------------------------------------------

double decay_A_alpha(double A, double alpha) { return 0.75 * A * std::pow(0.5, alpha); }

double decay_B_alpha(double A, double alpha) { return A * std::pow(alpha / (2.0 + alpha), 1.0 + alpha / 2.0); }

DecayResult decay_experiment(const SimConfig& config, const InitialLaw& law_a, const InitialLaw& law_b,
                             Coupling coupling, double horizon, int runs, int threads) {
  if (runs < 1) throw std::invalid_argument("decay_experiment needs runs >= 1");
  SimConfig c = config;
  c.horizon = horizon;
  c.runs = runs;
  const ObservationGrid grid = observation_grid(c);

  std::vector<std::vector<double>> per_run(static_cast<std::size_t>(runs));
  parallel_for(per_run.size(), threads, [&](std::size_t r) {
    const auto snaps = coupled_run(c, law_a, law_b, coupling, r, 1);
    per_run[r].reserve(snaps.size());
    for (const auto& s : snaps) per_run[r].push_back(s.xi);
  });
  const Column col = across_runs(per_run);

  DecayResult res;
  res.times = grid.times;
  res.xi = col.mean;
  res.xi_std_error = col.std_error;
  res.runs = runs;
  res.dt = c.step.dt;
  res.A = c.W.declared_A;
  res.alpha = c.W.declared_alpha;
  res.A_alpha = decay_A_alpha(res.A, res.alpha);
  res.B_alpha = decay_B_alpha(res.A, res.alpha);

  const double xi0 = res.xi.front();
  for (double t : res.times) {
    res.envelope_poly.push_back(beta_envelope(xi0, res.A, res.alpha, t));
    res.envelope_exp.push_back(xi0 * std::exp(-res.A_alpha * t));
  }
  res.t1_bound = res.A > 0.0 && xi0 > 0.0
                     ? std::max(0.0, std::pow(2.0, 2.0 + res.alpha) / 3.0 * std::log(xi0) / res.A)
                     : std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < res.xi.size(); ++k) {
    if (res.xi[k] <= 1.0) {
      res.t1_empirical = res.times[k];
      break;
    }
  }

  double max_se = 0.0;
  for (double s : res.xi_std_error) max_se = std::max(max_se, s);
  res.monotonicity_tolerance = 3.0 * max_se + 5.0 * res.dt;
  res.monotonicity_defect = 0.0;
  for (std::size_t k = 1; k < res.xi.size(); ++k) {
    const double rise = res.xi[k] - res.xi[k - 1];
    res.monotonicity_defect = std::max(res.monotonicity_defect, rise);
    if (rise > 3.0 * res.xi_std_error[k] + 5.0 * res.dt) res.monotone = false;
  }

  for (std::size_t k = 0; k < res.xi.size(); ++k) {
    if (res.xi[k] > res.envelope_poly[k] + 3.0 * res.xi_std_error[k] + 1e-12 * xi0) {
      res.envelope_holds = false;
      res.first_violation_time = res.times[k];
      break;
    }
  }

  const double t_end = res.times.back();
  res.tail_window_lo = t_end / 10.0;
  res.tail_window_hi = t_end;
  std::vector<double> lt, lx;
  for (std::size_t k = 0; k < res.times.size(); ++k) {
    if (res.times[k] > 0.0 && res.times[k] >= res.tail_window_lo && res.xi[k] > 0.0) {
      lt.push_back(std::log(res.times[k]));
      lx.push_back(std::log(res.xi[k]));
    }
  }
  res.tail_points = static_cast<long>(lt.size());
  if (lt.size() >= 2) res.tail_slope = least_squares(lt, lx).slope;

  if (!(xi0 > 0.0)) {
    res.fit_skipped = true;
  } else {
    fit_exponential(res, 0.0, res.t1_empirical > 0.0 ? res.t1_empirical : t_end);
  }
  return res;
}

DecayResult uniform_convex_decay(const SimConfig& config, double horizon, int runs, int threads) {
  DecayResult res =
      decay_experiment(config, config.initial, config.initial_b, config.experiment.coupling, horizon, runs, threads);
  if (!(res.xi.front() > 0.0)) {
    res.fit_skipped = true;
    return res;
  }
  res.fit_skipped = false;
  fit_exponential(res, 0.0, res.times.back());
  return res;
}

bool exponential_rate_matches(const DecayResult& result, double relative_tolerance) {
  if (result.fit_skipped || !(result.A > 0.0)) return false;
  const double target = 2.0 * result.A;
  return std::abs(result.exp_rate - target) <= relative_tolerance * target;
}

// ---------------------------------------------------------------------------

double apply_test_function(TestFunction f, double clamp_radius, const Eigen::Ref<const Vector>& x) {
  switch (f) {
    case TestFunction::ClampedCoordinate: return std::clamp(x(0), -clamp_radius, clamp_radius);
    case TestFunction::ClampedNorm: return std::min(x.norm(), clamp_radius);
    case TestFunction::SinCoordinate: return std::sin(x(0));
    case TestFunction::Constant: return 1.0;
  }
  return 0.0;
}

double lipschitz_constant(TestFunction f) { return f == TestFunction::Constant ? 0.0 : 1.0; }

ContractionConstants system_contraction_constants(const SimConfig& config, long probes, double extent) {
  const ProbeOptions opts{config.dim, config.checks.seed, 1e-9};
  const auto fit = [&](const Potential& p) {
    if (p.is_zero()) return std::pair{0.0, 0.0};
    const ConditionReport r = check_convexity_at_infinity(p, probes, extent, opts);
    return std::pair{r.fitted_constants.at("lambda"), r.fitted_constants.at("C")};
  };
  const auto [lambda_v, c_v] = fit(config.V);
  const auto [lambda_w, c_w] = fit(config.W);
  const auto n = static_cast<double>(config.n);
  ContractionConstants k;
  k.diffusion_bound_A = 2.0;
  if (config.mode == Mode::Projected) {
    k.lambda = lambda_w;
    k.C = n * c_w / 2.0;
    k.dim = (n - 1.0) * static_cast<double>(config.dim);
  } else {
    k.lambda = lambda_v;
    k.C = n * (c_v + c_w / 2.0);
    k.dim = n * static_cast<double>(config.dim);
  }
  return k;
}

ConcentrationResult concentration_suite(const SimConfig& config, int threads) {
  const ExperimentSpec& ex = config.experiment;
  if (ex.trials < 200) throw std::invalid_argument("concentration_suite needs trials >= 200");
  if (!(ex.concentration_time > 0.0)) throw std::invalid_argument("concentration time T must be > 0");
  SimConfig c = config;
  c.horizon = ex.concentration_time;
  c.observe = ObservationSpec{{0.0, ex.concentration_time}, 0.0, 0};
  const auto trials = static_cast<std::size_t>(ex.trials);
  const double clamp = ex.clamp_radius;

  std::vector<double> avg(trials), m2_0(trials), m2_t(trials);
  std::vector<Eigen::RowVectorXd> mean_0(trials), mean_t(trials);
  parallel_for(trials, threads, [&](std::size_t k) {
    const auto snaps = simulate_run(c, k, 1);
    const Positions& x = snaps.back().ensemble.positions;
    double acc = 0.0;
    for (Index i = 0; i < x.rows(); ++i) acc += apply_test_function(ex.function, clamp, x.row(i).transpose());
    avg[k] = acc / static_cast<double>(x.rows());
    m2_0[k] = snaps.front().observables.second_moment;
    m2_t[k] = snaps.back().observables.second_moment;
    mean_0[k] = snaps.front().ensemble.positions.colwise().mean();
    mean_t[k] = x.colwise().mean();
  });

  ConcentrationResult res;
  res.n = c.n;
  res.T = ex.concentration_time;
  res.trials = ex.trials;
  res.function = ex.function;
  res.clamp_radius = clamp;
  res.reference = mean(avg);
  res.reference_std_error = standard_error(avg);
  std::vector<double> dev(trials);
  for (std::size_t k = 0; k < trials; ++k) dev[k] = avg[k] - res.reference;

  res.r_grid = ex.r_grid;
  if (res.r_grid.empty()) {
    const double sd = std::sqrt(sample_variance(dev));
    const double unit = sd > 0.0 ? sd : 1.0 / std::sqrt(static_cast<double>(c.n));
    for (int k = 1; k <= 16; ++k) res.r_grid.push_back(0.25 * unit * k);
  }
  std::sort(res.r_grid.begin(), res.r_grid.end());

  const auto n = static_cast<double>(c.n);
  const double tiny = 1e-12;
  for (double r : res.r_grid) {
    const auto hits = std::count_if(dev.begin(), dev.end(), [&](double v) { return v >= r - tiny * std::abs(r); });
    const double p = static_cast<double>(hits) / static_cast<double>(trials);
    res.empirical_tail.push_back(p);
    res.tail_std_error.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(trials)));
    if (p > 0.0 && p < 1.0 && r > 0.0) res.c_fitted = std::max(res.c_fitted, n * r * r / -std::log(p));
    if (p >= 1.0 && r > 0.0) res.c_fitted = std::numeric_limits<double>::infinity();
  }
  for (std::size_t k = 0; k < res.r_grid.size(); ++k) {
    const double r = res.r_grid[k];
    const double b = r <= 0.0 ? 1.0 : (res.c_fitted > 0.0 ? std::exp(-n * r * r / res.c_fitted) : 0.0);
    res.bound_fitted.push_back(b);
    res.reliable.push_back(static_cast<double>(trials) * b >= 5.0);
    if (res.empirical_tail[k] > b * (1.0 + 1e-12)) res.fitted_holds = false;
    if (k > 0 && res.empirical_tail[k] > res.empirical_tail[k - 1]) res.tail_monotone = false;
  }

  // T_1 constant of the N d-dimensional law from the exponential moment bound
  res.pipeline_constants = system_contraction_constants(config);
  const ContractionConstants& kc = res.pipeline_constants;
  res.c_pipeline_total = std::numeric_limits<double>::infinity();
  if (kc.lambda > 0.0) {
    const double limit = kc.lambda / (2.0 * kc.diffusion_bound_A);
    for (int k = 1; k < 200; ++k) {
      const double delta = limit * k / 200.0;
      const double m = exp_square_moment_bound(kc, delta);
      const double value = t1_constant_from_moment(delta, m);
      if (value < res.c_pipeline_total) {
        res.c_pipeline_total = value;
        res.pipeline_delta = delta;
        res.pipeline_moment_bound = m;
      }
    }
  }
  res.c_pipeline_per_particle = res.c_pipeline_total / n;
  const double lip = lipschitz_constant(ex.function);
  long covered = 0;
  for (std::size_t k = 0; k < res.r_grid.size(); ++k) {
    const double r = res.r_grid[k];
    double b = 1.0;
    if (r > 0.0 && std::isfinite(res.c_pipeline_total)) b = lip > 0.0 ? std::exp(-n * r * r / (lip * lip * res.c_pipeline_total)) : 0.0;
    res.bound_pipeline.push_back(b);
    if (res.empirical_tail[k] <= b * (1.0 + 1e-12)) ++covered;
  }
  res.pipeline_coverage = static_cast<double>(covered) / static_cast<double>(res.r_grid.size());
  res.pipeline_holds = res.pipeline_coverage >= 0.95;

  // long-run estimate of the u_infinity integral: larger system, later time,
  // time-averaged over the second half
  {
    SimConfig big = c;
    big.n = 4 * c.n;
    big.horizon = 2.0 * ex.concentration_time;
    big.seed = derive_seed(config.seed, 0x7374617469636eULL);
    const auto total = static_cast<int>(std::floor(big.horizon / big.step.dt + 1e-9));
    const int stride = std::max(1, total / 400);
    big.observe = ObservationSpec{{}, stride * big.step.dt, total / stride + 1};
    const auto snaps = simulate_run(big, 0, threads);
    std::vector<double> series;
    for (const auto& s : snaps) {
      if (s.ensemble.time < 0.5 * big.horizon) continue;
      const Positions& x = s.ensemble.positions;
      double acc = 0.0;
      for (Index i = 0; i < x.rows(); ++i) acc += apply_test_function(ex.function, clamp, x.row(i).transpose());
      series.push_back(acc / static_cast<double>(x.rows()));
    }
    res.stationary_reference = mean(series);
    const std::size_t batches = std::min<std::size_t>(10, series.size());
    std::vector<double> means;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t lo = b * series.size() / batches;
      const std::size_t hi = (b + 1) * series.size() / batches;
      means.push_back(std::accumulate(series.begin() + static_cast<std::ptrdiff_t>(lo),
                                      series.begin() + static_cast<std::ptrdiff_t>(hi), 0.0) /
                      static_cast<double>(hi - lo));
    }
    res.stationary_std_error = standard_error(means);
  }

  const double alpha = c.W.declared_alpha;
  if (ex.chaos_K > 0.0) res.chaos_offset = std::sqrt(ex.chaos_K / std::pow(n, 1.0 / (1.0 + alpha)));
  // W_2^2(u_0, u_T) bounded through the independent coupling
  Eigen::RowVectorXd mu0 = Eigen::RowVectorXd::Zero(c.dim), mut = Eigen::RowVectorXd::Zero(c.dim);
  for (std::size_t k = 0; k < trials; ++k) {
    mu0 += mean_0[k];
    mut += mean_t[k];
  }
  mu0 /= static_cast<double>(trials);
  mut /= static_cast<double>(trials);
  const double w0_sq = std::max(0.0, mean(m2_0) + mean(m2_t) - 2.0 * mu0.dot(mut));
  res.decay_offset = std::sqrt(beta_envelope(w0_sq, c.W.declared_A, alpha, res.T));
  const double offset = res.chaos_offset + res.decay_offset;
  for (double r : res.r_grid) {
    const auto hits = std::count_if(avg.begin(), avg.end(),
                                    [&](double v) { return v - res.stationary_reference >= r - offset; });
    res.shifted_tail.push_back(static_cast<double>(hits) / static_cast<double>(trials));
  }
  return res;
}

// ---------------------------------------------------------------------------

ExpMomentSeries exp_moment_experiment(const SimConfig& config, double delta, const ContractionConstants& constants,
                                      int threads) {
  const ObservationGrid grid = observation_grid(config);
  const auto runs = static_cast<std::size_t>(std::max(config.runs, 1));
  const bool per_particle = config.W.is_zero();
  const auto n = static_cast<std::uint64_t>(config.n);

  // samples[run][time] -> squared distances of that run
  std::vector<std::vector<std::vector<double>>> samples(runs);
  parallel_for(runs, threads, [&](std::size_t r) {
    ParticleEnsemble a = initial_ensemble(config, r);
    ParticleEnsemble b = a;
    b.lineage.stream_offset = n;  // independent noise, same start
    const BrownianSource noise(a.lineage.seed);
    auto& out = samples[r];
    std::size_t next = 0;
    for (;;) {
      while (next < grid.steps.size() && grid.steps[next] == a.steps_taken) {
        std::vector<double> s;
        if (per_particle) {
          for (Index i = 0; i < a.n(); ++i) s.push_back((a.positions.row(i) - b.positions.row(i)).squaredNorm());
        } else {
          s.push_back((a.positions - b.positions).squaredNorm());
        }
        out.push_back(std::move(s));
        ++next;
      }
      if (a.steps_taken >= grid.total_steps || next == grid.steps.size()) break;
      a = step(a, config.V, config.W, config.step, noise);
      b = step(b, config.V, config.W, config.step, noise);
    }
  });

  ExpMomentSeries res;
  res.times = grid.times;
  res.delta = delta;
  res.constants = constants;
  res.per_particle = per_particle;
  const double bound = exp_square_moment_bound(constants, delta);
  for (std::size_t k = 0; k < grid.times.size(); ++k) {
    std::vector<double> pooled;
    for (std::size_t r = 0; r < runs; ++r) pooled.insert(pooled.end(), samples[r][k].begin(), samples[r][k].end());
    res.samples = static_cast<long>(pooled.size());
    res.estimates.push_back(exp_square_moment(pooled, delta, constants));
    res.bound.push_back(bound);
  }
  return res;
}

MomentTrendResult moment_trend(const SimConfig& config, double window_fraction, int threads) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) throw std::invalid_argument("window fraction must be in (0, 1]");
  const auto runs = static_cast<std::size_t>(std::max(config.runs, 2));
  std::vector<std::vector<double>> series(runs);
  parallel_for(runs, threads, [&](std::size_t r) {
    for (const auto& s : simulate_run(config, r, 1)) series[r].push_back(s.observables.second_moment);
  });
  MomentTrendResult res;
  res.times = observation_grid(config).times;
  const Column col = across_runs(series);
  res.second_moment = col.mean;
  res.second_moment_std_error = col.std_error;
  res.window_hi = res.times.back();
  res.window_lo = res.window_hi * (1.0 - window_fraction);
  std::vector<double> t;
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < res.times.size(); ++k) {
    if (res.times[k] >= res.window_lo) {
      t.push_back(res.times[k]);
      idx.push_back(k);
    }
  }
  if (t.size() < 3) throw std::invalid_argument("moment_trend needs at least three snapshots in the window");
  std::vector<double> y(t.size());
  for (const auto& s : series) {
    for (std::size_t k = 0; k < idx.size(); ++k) y[k] = s[idx[k]];
    res.run_slopes.push_back(least_squares(t, y).slope);
  }
  res.trend = zero_mean_test(res.run_slopes, 0.95);
  return res;
}

StabilityResult stability_run(const SimConfig& config, Scheme scheme) {
  SimConfig c = config;
  c.step.scheme = scheme;
  ParticleEnsemble e = initial_ensemble(c, 0);
  const BrownianSource noise(e.lineage.seed);
  const auto total = observation_grid(c).total_steps;
  StabilityResult res;
  try {
    while (e.steps_taken < total) {
      e = step(e, c.V, c.W, c.step, noise);
      ++res.steps_completed;
    }
  } catch (const IntegrationError& err) {
    res.finite = false;
    res.failure_time = err.time;
    res.failure = err.what();
    return res;
  } catch (const StabilityError& err) {
    res.finite = false;
    res.failure_time = e.time;
    res.failure = err.what();
    return res;
  }
  res.second_moment = moment(e.positions, 2).value;
  res.fourth_moment = moment(e.positions, 4).value;
  res.finite = std::isfinite(res.second_moment) && std::isfinite(res.fourth_moment);
  return res;
}

}  // namespace granular
