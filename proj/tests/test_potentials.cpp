#include "granular/potential.hpp"
#include "granular/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace granular;

namespace {

// deterministic pseudo-random vectors for property checks
Vector random_vector(const CounterRng& rng, std::uint64_t draw, Index dim, double scale) {
  Vector x(dim);
  for (Index k = 0; k < dim; ++k) x(k) = scale * (2.0 * rng.uniform(draw, 0, static_cast<std::uint64_t>(k)) - 1.0);
  return x;
}

std::vector<Potential> symmetric_kinds() {
  return {Potential::quadratic(1.0),         Potential::quadratic(0.3),       Potential::power_law(2.0),
          Potential::power_law(3.0),         Potential::power_law(4.0),       Potential::power_law(5.5),
          Potential::uniform_plus_bump(1.0, 2.0, 1.5), Potential::sampled(0.5, {0.0, 1.0, 1.5, 3.0, 2.0, 8.0, 9.0, 20.0, 21.0})};
}

}  // namespace

TEST_CASE("gradient examples") {
  CHECK(grad(Potential::quadratic(1.0), Vector::Constant(1, 3.0))(0) == 6.0);
  CHECK(grad(Potential::power_law(4.0), Vector::Constant(1, 2.0))(0) == 32.0);
  const Vector g = grad(Potential::power_law(3.0), Vector::Zero(2));
  CHECK(g(0) == 0.0);
  CHECK(g(1) == 0.0);
}

TEST_CASE("quadratic gradient is exactly 2 kappa x") {
  const CounterRng rng(11, RngDomain::Probe);
  for (double kappa : {0.25, 1.0, 3.7}) {
    const Potential q = Potential::quadratic(kappa);
    for (std::uint64_t n = 0; n < 50; ++n) {
      const Vector x = random_vector(rng, n, 3, 10.0);
      CHECK((grad(q, x) - 2.0 * kappa * x).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("power-law gradient matches p |x|^(p-2) x") {
  const CounterRng rng(12, RngDomain::Probe);
  for (double p : {2.0, 3.0, 4.0, 4.5, 6.0}) {
    const Potential w = Potential::power_law(p);
    for (std::uint64_t n = 0; n < 50; ++n) {
      const Vector x = random_vector(rng, n, 2, 3.0);
      const Vector expect = p * std::pow(x.norm(), p - 2.0) * x;
      CHECK((grad(w, x) - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
    }
  }
}

TEST_CASE("gradients of the built-in kinds are odd bit for bit and vanish at 0") {
  const CounterRng rng(13, RngDomain::Probe);
  for (const Potential& w : symmetric_kinds()) {
    CAPTURE(to_string(w.kind));
    CHECK(grad(w, Vector::Zero(2)).cwiseAbs().maxCoeff() == 0.0);
    for (std::uint64_t n = 0; n < 200; ++n) {
      const Vector x = random_vector(rng, n, 2, 3.0);
      const Vector sum = grad(w, x) + grad(w, Vector(-x));
      CHECK(sum.cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("central differences converge at order two away from the origin") {
  // error(h) ~ K h^2: the log-log slope over three decades of h is about 2
  const CounterRng rng(14, RngDomain::Probe);
  for (const Potential& w : {Potential::quadratic(0.7), Potential::power_law(3.0), Potential::power_law(4.0),
                             Potential::uniform_plus_bump(1.0, 0.5, 2.0)}) {
    CAPTURE(to_string(w.kind));
    Vector x = random_vector(rng, 1, 2, 1.0);
    x(0) += 1.3;  // keep away from 0
    const Vector g = grad(w, x);
    const Vector e = Vector::Unit(2, 0);
    std::vector<double> log_h, log_err;
    for (double h : {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}) {
      const double fd = (value(w, Vector(x + h * e)) - value(w, Vector(x - h * e))) / (2.0 * h);
      const double err = std::abs(fd - g(0));
      if (w.kind == PotentialKind::Quadratic) {
        CHECK(err <= 1e-9);  // exact up to round-off
        continue;
      }
      log_h.push_back(std::log(h));
      log_err.push_back(std::log(err));
    }
    if (log_h.size() >= 2) {
      const double slope = (log_err.back() - log_err.front()) / (log_h.back() - log_h.front());
      CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
    }
  }
}

TEST_CASE("sampled potential: odd extension, interpolation and domain errors") {
  const Potential s = Potential::sampled(0.5, {7.0, 1.0, 3.0});
  CHECK(s.profile[0] == 0.0);  // forced, since the gradient must vanish at 0
  CHECK(grad(s, Vector::Constant(1, 0.25))(0) == doctest::Approx(0.5));
  CHECK(grad(s, Vector::Constant(1, 0.75))(0) == doctest::Approx(2.0));
  CHECK(grad(s, Vector::Constant(1, -0.75))(0) == doctest::Approx(-2.0));
  CHECK(value(s, Vector::Constant(1, 1.0)) == doctest::Approx(0.25 + 1.0));

  Vector bad(2);
  bad << 0.5, -1.5;
  try {
    grad(s, bad);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("coordinate 1") != std::string::npos);
  }
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(Potential::quadratic(0.0), std::invalid_argument);
  CHECK_THROWS_AS(Potential::power_law(1.0), std::invalid_argument);
  CHECK_THROWS_AS(Potential::uniform_plus_bump(1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Potential::sampled(0.1, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(potential_kind_from_string("cubic"), std::invalid_argument);
}

TEST_CASE("power-law declared A is the sharp C(A, p-2) constant in one dimension") {
  // oracle: dense scan of (x-y)(g(x)-g(y)) / (eps^a (|x-y|^2 - eps^2))
  for (double p : {3.0, 4.0}) {
    const Potential w = Potential::power_law(p);
    const double a = p - 2.0;
    double best = INFINITY;
    for (int i = -120; i <= 120; ++i) {
      for (int j = -120; j <= 120; ++j) {
        const double x = 0.025 * i, y = 0.025 * j;
        auto g = [p](double z) { return p * std::pow(std::abs(z), p - 2.0) * z; };
        const double dot = (x - y) * (g(x) - g(y));
        for (int k = 1; k < 100; ++k) {
          const double eps = 0.01 * k;
          const double scale = std::pow(eps, a) * ((x - y) * (x - y) - eps * eps);
          if (scale > 1e-9) best = std::min(best, dot / scale);
        }
      }
    }
    CHECK(w.declared_alpha == a);
    CHECK(w.declared_A == doctest::Approx(best).epsilon(0.01));
    CHECK(w.declared_A <= best * (1.0 + 1e-9));
  }
}
