#include "granular/experiments.hpp"

#include <doctest.h>

#include <cmath>

using namespace granular;

namespace {

StepPolicy euler(double dt) {
  StepPolicy p;
  p.scheme = Scheme::EulerMaruyama;
  p.dt = dt;
  return p;
}

InitialLaw point_mass() {
  InitialLaw law;
  law.kind = InitialKind::TwoPoint;
  law.point_a = law.point_b = Vector::Zero(1);
  return law;
}

SimConfig projected_quadratic(double kappa) {
  SimConfig c;
  c.n = 8;
  c.mode = Mode::Projected;
  c.W = Potential::quadratic(kappa);
  c.step = euler(1e-3);
  c.observe.stride = 0.05;
  c.observe.count = 21;
  c.initial.variance = 1.0;
  c.initial_b.kind = InitialKind::Uniform;
  c.initial_b.half_width = 3.0;
  c.seed = 4;
  return c;
}

}  // namespace

TEST_CASE("decay constants A(alpha) and B(alpha)") {
  CHECK(decay_A_alpha(4.0, 0.0) == 3.0);
  CHECK(decay_A_alpha(4.0, 2.0) == 0.75);
  CHECK(decay_B_alpha(4.0, 2.0) == doctest::Approx(1.0));
  CHECK(decay_B_alpha(2.0, 1.0) == doctest::Approx(2.0 * std::pow(1.0 / 3.0, 1.5)));
}

TEST_CASE("uniformly convex interaction: the coupled distance decays at rate 2A = 4 kappa") {
  double rate_one = 0.0;
  for (double kappa : {0.5, 1.0, 2.0}) {
    const DecayResult r = uniform_convex_decay(projected_quadratic(kappa), 1.0, 4);
    CAPTURE(kappa);
    CHECK(r.A == 2.0 * kappa);
    CHECK(exponential_rate_matches(r));
    CHECK(r.monotone);
    CHECK(r.envelope_holds);
    if (kappa == 1.0) rate_one = r.exp_rate;
    if (kappa == 2.0) CHECK(r.exp_rate / rate_one == doctest::Approx(2.0).epsilon(0.05));
  }
}

TEST_CASE("a zero initial distance skips the rate fit") {
  SimConfig c = projected_quadratic(1.0);
  c.initial = c.initial_b = point_mass();
  const DecayResult r = uniform_convex_decay(c, 0.5, 2);
  CHECK(r.xi.front() == 0.0);
  CHECK(r.fit_skipped);
  CHECK(!exponential_rate_matches(r));
}

TEST_CASE("chaos scan from a point mass follows the Ornstein-Uhlenbeck oracle") {
  // With W = kappa |x|^2 and a centered auxiliary system both Y^1 and the
  // proxy feel the drift -2 kappa x; their difference is driven only by the
  // mean of the N noises, so N E|D_t|^2 = (1 - e^(-4 kappa t)) / (2 kappa).
  SimConfig c;
  c.mode = Mode::Projected;
  c.W = Potential::quadratic(1.0);
  c.step = euler(0.01);
  c.horizon = 2.0;
  c.observe.stride = 0.5;
  c.observe.count = 5;
  c.initial = point_mass();
  c.seed = 9;
  const ChaosScanResult r = chaos_scan(c, {4, 8}, 64, 128);
  const double dt = 0.01, steps = 200;
  // discrete-time variance of the recursion D' = (1 - 2 kappa dt) D + noise
  const double q = std::pow(1.0 - 2.0 * dt, 2.0);
  const double scaled = 2.0 * dt * (1.0 - std::pow(q, steps)) / (1.0 - q);
  for (std::size_t k = 0; k < 2; ++k) {
    const double expect = scaled / r.n_values[k];
    CAPTURE(r.n_values[k]);
    CHECK(std::abs(r.errors[k] - expect) <= 4.0 * r.std_errors[k]);
  }
  CHECK(r.fitted_slope == doctest::Approx(-1.0).epsilon(0.3));
  CHECK(r.predicted_slope == -1.0);
}

TEST_CASE("chaos scan argument checks") {
  SimConfig c;
  c.mode = Mode::Projected;
  c.W = Potential::quadratic(1.0);
  c.horizon = 0.1;
  CHECK_THROWS_AS(chaos_scan(c, {8, 4}, 128, 4), std::invalid_argument);
  CHECK_THROWS_AS(chaos_scan(c, {4, 8}, 32, 4), std::invalid_argument);  // M < 8 max N
  c.step.scheme = Scheme::AdaptiveEuler;
  CHECK_THROWS_AS(chaos_scan(c, {4, 8}, 64, 4), std::invalid_argument);
}

TEST_CASE("test functions") {
  Vector x(2);
  x << 3.0, 4.0;
  CHECK(apply_test_function(TestFunction::ClampedCoordinate, 2.0, x) == 2.0);
  CHECK(apply_test_function(TestFunction::ClampedNorm, 10.0, x) == 5.0);
  CHECK(apply_test_function(TestFunction::SinCoordinate, 0.0, x) == std::sin(3.0));
  CHECK(apply_test_function(TestFunction::Constant, 0.0, x) == 1.0);
  CHECK(lipschitz_constant(TestFunction::Constant) == 0.0);
}

TEST_CASE("a constant observable never deviates") {
  SimConfig c;
  c.n = 4;
  c.V = Potential::quadratic(0.5);
  c.W = Potential::quadratic(0.5);
  c.step = euler(0.01);
  c.experiment.function = TestFunction::Constant;
  c.experiment.concentration_time = 0.5;
  c.experiment.trials = 200;
  const ConcentrationResult r = concentration_suite(c);
  CHECK(r.reference == 1.0);
  for (double p : r.empirical_tail) CHECK(p == 0.0);
  CHECK(r.fitted_holds);
  CHECK(r.pipeline_holds);
  CHECK(r.tail_monotone);
  CHECK(r.stationary_reference == 1.0);

  c.experiment.trials = 100;
  CHECK_THROWS_AS(concentration_suite(c), std::invalid_argument);
}

TEST_CASE("contraction constants of the whole system") {
  SimConfig c;
  c.n = 10;
  c.V = Potential::quadratic(0.5);
  c.W = Potential::quadratic(0.5);
  const ContractionConstants raw = system_contraction_constants(c);
  CHECK(raw.lambda == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(raw.C <= 1e-5);
  CHECK(raw.dim == 10.0);
  c.V = Potential::zero();
  c.mode = Mode::Projected;
  const ContractionConstants proj = system_contraction_constants(c);
  CHECK(proj.lambda == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(proj.dim == 9.0);
}

TEST_CASE("exponential moment of two OU copies stays below the uniform bound") {
  // independent OU particles with V = |x|^2 / 2: X - Y is Gaussian with
  // variance 2 (1 - e^(-2t)), so E exp(delta |X - Y|^2) = (1 - 4 delta (1 - e^(-2t)))^(-1/2)
  SimConfig c;
  c.n = 200;
  c.V = Potential::quadratic(0.5);
  c.step = euler(0.002);
  c.observe.times = {0.0, 0.5, 1.0, 2.0};
  c.horizon = 2.0;
  c.runs = 10;
  c.seed = 5;
  const ContractionConstants k{1.0, 0.0, 2.0, 1.0};
  const double delta = 0.1;
  const ExpMomentSeries s = exp_moment_experiment(c, delta, k);
  CHECK(s.per_particle);
  CHECK(s.samples == 2000);
  CHECK(s.estimates.front().value == 1.0);
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const double exact = 1.0 / std::sqrt(1.0 - 4.0 * delta * (1.0 - std::exp(-2.0 * s.times[i])));
    CAPTURE(s.times[i]);
    CHECK(std::abs(s.estimates[i].mean - exact) <= 4.0 * s.estimates[i].mean_std_error + 1e-12);
    CHECK(s.estimates[i].value <= s.bound[i]);
  }
}

TEST_CASE("second moment trend") {
  SimConfig c;
  c.n = 16;
  c.mode = Mode::Projected;
  c.W = Potential::quadratic(1.0);
  c.step = euler(0.01);
  c.horizon = 4.0;
  c.observe.stride = 0.1;
  c.observe.count = 41;
  c.runs = 16;
  // started at the stationary spread the trend is flat
  const MomentTrendResult flat = moment_trend(c);
  CHECK(flat.trend.accepted);
  CHECK(flat.window_lo == doctest::Approx(2.0));

  // free diffusion: E|Y|^2 grows linearly
  c.W = Potential::zero();
  const MomentTrendResult growing = moment_trend(c);
  CHECK(!growing.trend.accepted);
  CHECK(growing.trend.mean > 0.0);
}

TEST_CASE("stability run separates the schemes") {
  SimConfig c;
  c.n = 2;
  c.V = Potential::power_law(4.0);
  c.initial.kind = InitialKind::TwoPoint;
  c.initial.point_a = c.initial.point_b = Vector::Constant(1, 10.0);
  c.step.dt = 0.1;
  c.horizon = 5.0;
  const StabilityResult em = stability_run(c, Scheme::EulerMaruyama);
  CHECK(!em.finite);
  CHECK(em.failure_time > 0.0);
  CHECK(!em.failure.empty());
  const StabilityResult tamed = stability_run(c, Scheme::TamedEuler);
  CHECK(tamed.finite);
  CHECK(tamed.steps_completed == 50);
}
