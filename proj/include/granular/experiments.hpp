#pragma once

#include "granular/metrics.hpp"
#include "granular/sim_config.hpp"
#include "granular/stats.hpp"

#include <string>
#include <vector>

namespace granular {

// ---------------------------------------------------------------------------
// Propagation of chaos

struct ChaosScanResult {
  std::vector<int> n_values;
  std::vector<double> errors;      // max_t of the run average of |Y^1_t - Xbar^1_t|^2
  std::vector<double> std_errors;  // at the maximising snapshot
  std::vector<double> argmax_times;
  std::vector<double> dynamic_errors;  // the same maximum over t > 0 only
  double fitted_slope = 0.0;
  double fitted_intercept = 0.0;
  double predicted_slope = 0.0;  // -1 / (1 + alpha)
  double fitted_K = 0.0;         // smallest K with errors <= K / N^(1/(1+alpha))
  int m_reference = 0;
  int runs_per_n = 0;
  std::vector<double> times;
  int doubling_runs = 0;
  double proxy_bias = 0.0;  // |e_M - e_2M| / e_M at the largest N
  bool proxy_warning = false;
  bool decreasing = false;  // errors decrease in N up to 2 stderr
  std::vector<std::string> warnings;
};

/// Couples particle 1 of the N-particle system with a proxy of the nonlinear
/// process: the proxy shares particle 1's Brownian stream and feels the drift
/// of an independent auxiliary M-particle system in place of the unknown law.
/// The auxiliary system is simulated once per run and shared by every N. A
/// second pass with 2M auxiliary particles on the first runs measures the
/// proxy bias.
ChaosScanResult chaos_scan(const SimConfig& config, const std::vector<int>& n_values, int m_reference,
                           int runs_per_n, int threads = 1);

// ---------------------------------------------------------------------------
// Coupled decay

struct DecayResult {
  std::vector<double> times;
  std::vector<double> xi;  // run average of (1/N) sum_i |Y_i - Y'_i|^2
  std::vector<double> xi_std_error;
  std::vector<double> envelope_poly;  // (xi0^(-alpha/2) + B t)^(-2/alpha); xi0 e^(-2 A t) when alpha = 0
  std::vector<double> envelope_exp;   // xi0 e^(-A(alpha) t)
  double A = 0.0;
  double alpha = 0.0;
  double A_alpha = 0.0;
  double B_alpha = 0.0;
  double t1_bound = 0.0;
  double t1_empirical = -1.0;  // first snapshot with xi <= 1; -1 if none

  double monotonicity_defect = 0.0;  // max_k xi(t_{k+1}) - xi(t_k)
  double monotonicity_tolerance = 0.0;
  bool monotone = true;

  bool envelope_holds = true;
  double first_violation_time = -1.0;

  // log xi vs log t on the last decade of times
  double tail_slope = 0.0;
  double tail_window_lo = 0.0;
  double tail_window_hi = 0.0;
  long tail_points = 0;

  // -d log xi / dt
  double exp_rate = 0.0;
  double exp_window_lo = 0.0;
  double exp_window_hi = 0.0;
  long exp_points = 0;
  bool fit_skipped = false;

  int runs = 0;
  double dt = 0.0;
};

/// A(alpha) = (3 A / 4) (1/2)^alpha.
double decay_A_alpha(double A, double alpha);
/// B(alpha) = A (alpha / (2 + alpha))^(1 + alpha / 2).
double decay_B_alpha(double A, double alpha);

/// Synchronously coupled runs from law_a and law_b; xi averaged over runs
/// and compared with the envelopes built from W's declared (A, alpha).
DecayResult decay_experiment(const SimConfig& config, const InitialLaw& law_a, const InitialLaw& law_b,
                             Coupling coupling, double horizon, int runs, int threads = 1);

/// decay_experiment from config.initial / config.initial_b with an
/// exponential fit over every snapshot above the round-off floor.
DecayResult uniform_convex_decay(const SimConfig& config, double horizon, int runs, int threads = 1);

/// |r - 2A| / (2A) <= 0.1 for the fitted exponential rate r.
bool exponential_rate_matches(const DecayResult& result, double relative_tolerance = 0.1);

// ---------------------------------------------------------------------------
// Concentration

double apply_test_function(TestFunction f, double clamp_radius, const Eigen::Ref<const Vector>& x);
/// 1 for the built-in functions, 0 for Constant.
double lipschitz_constant(TestFunction f);

struct ConcentrationResult {
  Index n = 0;
  double T = 0.0;
  int trials = 0;
  TestFunction function = TestFunction::ClampedCoordinate;
  double clamp_radius = 0.0;

  std::vector<double> r_grid;
  std::vector<double> empirical_tail;
  std::vector<double> tail_std_error;
  std::vector<bool> reliable;  // trials * bound_fitted(r) >= 5
  std::vector<double> bound_fitted;
  std::vector<double> bound_pipeline;
  std::vector<double> shifted_tail;  // of mean f - (u_infinity estimate), at r - offsets

  double reference = 0.0;  // pooled estimate of E f(X^1_T)
  double reference_std_error = 0.0;
  double c_fitted = 0.0;
  double c_pipeline_total = 0.0;         // T_1 constant of the N d-dimensional law
  double c_pipeline_per_particle = 0.0;  // c_pipeline_total / N
  double pipeline_delta = 0.0;
  double pipeline_moment_bound = 0.0;
  ContractionConstants pipeline_constants;

  double stationary_reference = 0.0;  // long-run estimate of the u_infinity integral
  double stationary_std_error = 0.0;
  double chaos_offset = 0.0;
  double decay_offset = 0.0;

  double pipeline_coverage = 0.0;  // share of grid points with tail <= pipeline bound
  bool fitted_holds = true;
  bool pipeline_holds = true;
  bool tail_monotone = true;
};

/// `trials` independent runs to time T of the N = config.n system; the tail
/// of (1/N) sum_k f(X^k_T) - reference against e^(-N r^2 / c).
ConcentrationResult concentration_suite(const SimConfig& config, int threads = 1);

/// Constants of the full N d-dimensional drift used by the T_1 pipeline.
ContractionConstants system_contraction_constants(const SimConfig& config, long probes = 512,
                                                  double extent = 4.0);

// ---------------------------------------------------------------------------
// Exponential square moments, long-time moments, stability

struct ExpMomentSeries {
  std::vector<double> times;
  std::vector<ExpMomentEstimate> estimates;
  std::vector<double> bound;  // time-uniform bound
  double delta = 0.0;
  ContractionConstants constants;
  long samples = 0;
  bool per_particle = false;  // W = 0: every particle is an independent copy
};

/// Pairs of copies started at the same point with independent noise. With
/// W = 0 the particles are independent diffusions and each one contributes a
/// sample; otherwise the whole N-particle state is one sample.
ExpMomentSeries exp_moment_experiment(const SimConfig& config, double delta, const ContractionConstants& constants,
                                      int threads = 1);

struct MomentTrendResult {
  std::vector<double> times;
  std::vector<double> second_moment;  // run average of mean_i |Y_i|^2
  std::vector<double> second_moment_std_error;
  std::vector<double> run_slopes;     // OLS slope of each run on the window
  double window_lo = 0.0;
  double window_hi = 0.0;
  ZeroMeanTest trend;
};

/// Slope test of the particle-averaged second moment over the last
/// `window_fraction` of the horizon.
MomentTrendResult moment_trend(const SimConfig& config, double window_fraction = 0.5, int threads = 1);

struct StabilityResult {
  bool finite = true;
  std::int64_t steps_completed = 0;
  double failure_time = -1.0;
  std::string failure;
  double second_moment = 0.0;  // at the end, when finite
  double fourth_moment = 0.0;
};

/// Integrates a single run with `scheme`, stopping at the first non-finite state.
StabilityResult stability_run(const SimConfig& config, Scheme scheme);

}  // namespace granular
