#include "granular/conditions.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>

using namespace granular;

namespace {

const std::vector<double> kEps{0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.99};

// 1-d gradient in closed form, independent of the library
std::function<double(double)> scalar_grad(const Potential& w) {
  switch (w.kind) {
    case PotentialKind::Quadratic: return [k = w.stiffness](double x) { return 2.0 * k * x; };
    case PotentialKind::PowerLaw:
      return [p = w.exponent](double x) { return p * std::pow(std::abs(x), p - 2.0) * x; };
    case PotentialKind::UniformPlusBump:
      return [k = w.stiffness, a = w.bump_amplitude, rho = w.bump_radius](double x) {
        const double s = 1.0 - x * x / (rho * rho);
        return 2.0 * k * x - (x * x < rho * rho ? 6.0 * a * x * s * s / (rho * rho) : 0.0);
      };
    default: return [](double) { return 0.0; };
  }
}

// worst (bound - dot) of C(A, alpha) over a dense 1-d grid on [-R, R]^2
double dense_C_violation(const Potential& w, double A, double alpha, double R) {
  const auto g = scalar_grad(w);
  double worst = -INFINITY;
  const int n = 200;
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j) {
      const double x = R * i / n, y = R * j / n;
      const double dot = (x - y) * (g(x) - g(y));
      for (double e : kEps) worst = std::max(worst, A * std::pow(e, alpha) * ((x - y) * (x - y) - e * e) - dot);
    }
  return worst;
}

}  // namespace

TEST_CASE("probe pairs: shape, range and near-diagonal quarter") {
  const ProbePairs p = make_probe_pairs(200, 3.0, 2, 5);
  CHECK(p.x.rows() == 200);
  CHECK(p.x.cols() == 2);
  CHECK(p.x.cwiseAbs().maxCoeff() <= 3.0);
  for (Index k = 150; k < 200; ++k) {
    const double u = (p.x.row(k) - p.y.row(k)).norm();
    CHECK(u > 0.0);
    CHECK(u <= 0.5 + 1e-12);
  }
  // low-discrepancy part fills both halves of every coordinate
  int positive = 0;
  for (Index k = 0; k < 150; ++k) positive += p.x(k, 0) > 0.0;
  CHECK(positive > 60);
  CHECK(positive < 90);
}

TEST_CASE("condition C: declared power-law constants hold on the probes") {
  for (double expo : {3.0, 4.0}) {
    const Potential w = Potential::power_law(expo);
    const ConditionReport r = check_condition_C(w, w.declared_A, w.declared_alpha, 1024, 4.0, kEps);
    CAPTURE(expo);
    CHECK(r.condition_name == "C_A_alpha");
    CHECK(r.satisfied());
    CHECK(r.fitted_constants.at("A_max") >= w.declared_A * (1.0 - 1e-9));
    CHECK(dense_C_violation(w, w.declared_A, w.declared_alpha, 4.0) <= 1e-9);
  }
}

TEST_CASE("condition C: quadratic with A = 2 kappa, alpha = 0") {
  const Potential q = Potential::quadratic(1.0);
  const ConditionReport r = check_condition_C(q, 2.0, 0.0, 512, 4.0, kEps);
  CHECK(r.satisfied());
  CHECK(r.fitted_constants.at("A_max") >= 2.0);
  CHECK(r.fitted_constants.at("A_max") <= 2.1);
  CHECK(!check_condition_C(q, 2.5, 0.0, 512, 4.0, kEps).satisfied());
}

TEST_CASE("condition C: a concave bump is caught and the dense oracle agrees") {
  const Potential bump = Potential::uniform_plus_bump(1.0, 2.0, 1.5);
  const ConditionReport r = check_condition_C(bump, 2.0, 0.0, 512, 4.0, kEps);
  CHECK(!r.satisfied());
  CHECK(r.worst_violation > 0.0);
  CHECK(dense_C_violation(bump, 2.0, 0.0, 4.0) > 0.0);
}

TEST_CASE("convexity fit: quadratic gives lambda = 2 kappa and C = 0") {
  const ConditionReport r = check_convexity_at_infinity(Potential::quadratic(1.0), 512, 4.0);
  CHECK(r.condition_name == "A4_conv_at_infinity");
  CHECK(r.fitted_constants.at("lambda") == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(r.fitted_constants.at("C") <= 1e-6);
  CHECK(r.satisfied());
}

TEST_CASE("convexity fit: zero potential gives lambda = 0") {
  const ConditionReport r = check_convexity_at_infinity(Potential::zero(), 256, 4.0);
  // bisection stops where the relative tolerance still admits lambda
  CHECK(r.fitted_constants.at("lambda") <= 1e-9);
  CHECK(r.fitted_constants.at("C") <= 1e-8);
}

TEST_CASE("convexity fit: |x|^4 constants hold on a dense 1-d grid") {
  const Potential w = Potential::power_law(4.0);
  const ConditionReport r = check_convexity_at_infinity(w, 1024, 4.0);
  const double lambda = r.fitted_constants.at("lambda");
  const double C = r.fitted_constants.at("C");
  CHECK(r.satisfied());
  CHECK(lambda >= 3.0);
  const auto g = scalar_grad(w);
  double worst = -INFINITY;
  for (int i = -400; i <= 400; ++i)
    for (int j = -400; j <= 400; ++j) {
      const double x = i / 100.0, y = j / 100.0;
      worst = std::max(worst, lambda * (x - y) * (x - y) - C - (x - y) * (g(x) - g(y)));
    }
  CHECK(worst <= 0.05 * (1.0 + C));
}

TEST_CASE("declared convexity constants") {
  const Potential q = Potential::quadratic(0.5);
  CHECK(check_convexity_at_infinity(q, 1.0, 0.0, 256, 4.0).satisfied());
  CHECK(!check_convexity_at_infinity(q, 1.5, 0.0, 256, 4.0).satisfied());
}

TEST_CASE("polynomial growth") {
  const Potential w = Potential::power_law(4.0);
  const ConditionReport ok = check_polynomial_growth(w, 3, 512, 4.0);
  CHECK(ok.condition_name == "A3");
  CHECK(ok.satisfied());

  // with m = 1 the ratio keeps growing with the extent: along y = x - 1 it is
  // about 6 |x|, so halving the probes more than halves C_hat
  const ConditionReport bad = check_polynomial_growth(w, 1, 512, 4.0);
  CHECK(!bad.satisfied());
  const auto g = scalar_grad(w);
  auto ratio = [&](double x) { return std::abs(g(x) - g(x - 1.0)) / (1.0 + std::abs(x) + std::abs(x - 1.0)); };
  CHECK(ratio(4.0) > 1.5 * ratio(2.0));

  // quadratic, m = 0 and |x - y| < 1: the ratio is 2 kappa / 3 exactly
  const ConditionReport q = check_polynomial_growth(Potential::quadratic(1.5), 0, 256, 0.25);
  CHECK(q.fitted_constants.at("C_hat") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q.satisfied());
}

TEST_CASE("reports are deterministic in the seed") {
  const Potential w = Potential::power_law(3.0);
  const ProbeOptions a{2, 7, 1e-9}, b{2, 8, 1e-9};
  CHECK(check_convexity_at_infinity(w, 256, 3.0, a) == check_convexity_at_infinity(w, 256, 3.0, a));
  CHECK(make_probe_pairs(64, 3.0, 2, 7).x != make_probe_pairs(64, 3.0, 2, 8).x);
  CHECK(check_condition_C(w, 1.0, 1.0, 256, 3.0, kEps, a).worst_violation !=
        check_condition_C(w, 1.0, 1.0, 256, 3.0, kEps, b).worst_violation);
}

TEST_CASE("bad arguments") {
  const Potential q = Potential::quadratic(1.0);
  CHECK_THROWS_AS(check_condition_C(q, 1.0, 0.0, 0, 4.0, kEps), std::invalid_argument);
  CHECK_THROWS_AS(check_condition_C(q, 1.0, 0.0, 16, 4.0, {1.5}), std::invalid_argument);
  CHECK_THROWS_AS(check_polynomial_growth(q, -1, 16, 4.0), std::invalid_argument);
}
