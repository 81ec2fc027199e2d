#include "granular/dynamics.hpp"
#include "granular/metrics.hpp"
#include "granular/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace granular;

namespace {

Positions gaussian(Index n, Index d, std::uint64_t seed, double var = 1.0, double mean = 0.0) {
  InitialLaw law;
  law.variance = var;
  law.mean = Vector::Constant(1, mean);
  return sample_initial(law, n, d, seed);
}

std::vector<double> column(const Positions& x) { return {x.data(), x.data() + x.rows()}; }

// W_p^p by trying every permutation
double brute_force(const Positions& a, const Positions& b, int p) {
  std::vector<Index> perm(static_cast<std::size_t>(a.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double c = 0.0;
    for (Index i = 0; i < a.rows(); ++i)
      c += std::pow((a.row(i) - b.row(perm[static_cast<std::size_t>(i)])).norm(), p);
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::pow(best / static_cast<double>(a.rows()), 1.0 / p);
}

double double_factorial(int n) { return n <= 1 ? 1.0 : n * double_factorial(n - 2); }

}  // namespace

TEST_CASE("moment examples") {
  Positions x(2, 1);
  x << 1.0, -3.0;
  CHECK(moment(x, 2).value == 5.0);
  CHECK(moment(x, 4).value == 41.0);
  CHECK(pairwise_moment(x, 2).value == 16.0);
  CHECK(moment(x, 2).std_error == 0.0);

  const std::vector<Positions> runs{x, Positions::Constant(2, 1, 1.0)};
  const MomentEstimate m = moment(runs, 2);
  CHECK(m.value == 3.0);
  CHECK(m.std_error == doctest::Approx(2.0));  // sd of {5, 1} over sqrt(2)
}

TEST_CASE("pairwise moment of a two-point ensemble") {
  // N/2 particles at each of +1 and -1: N^2/2 of the N(N-1) ordered pairs sit at distance 2
  for (Index n : {2, 4, 10}) {
    Positions x(n, 1);
    for (Index i = 0; i < n; ++i) x(i, 0) = i % 2 ? 1.0 : -1.0;
    CHECK(pairwise_moment(x, 2).value == doctest::Approx(2.0 * n / (n - 1.0)));
  }
  CHECK(pairwise_moment(Positions::Constant(5, 2, 0.3), 2).value == 0.0);
  CHECK(moment(Positions::Zero(4, 2), 2).value == 0.0);
}

TEST_CASE("pairwise moment agrees with enumeration of all pairs") {
  const Positions x = gaussian(9, 2, 3);
  for (int order : {2, 4}) {
    double s = 0.0;
    int count = 0;
    for (Index i = 0; i < 9; ++i)
      for (Index j = 0; j < 9; ++j)
        if (i != j) {
          s += std::pow((x.row(i) - x.row(j)).norm(), order);
          ++count;
        }
    CHECK(pairwise_moment(x, order).value == doctest::Approx(s / count).epsilon(1e-12));
  }
}

TEST_CASE("Gaussian moments are estimated without bias") {
  // E|X|^2k of a standard normal in 1-d is (2k - 1)!!
  std::vector<Positions> runs;
  for (std::uint64_t r = 0; r < 64; ++r) runs.push_back(gaussian(500, 1, 1000 + r));
  for (int order : {2, 4, 6}) {
    const MomentEstimate m = moment(runs, order);
    CAPTURE(order);
    CHECK(std::abs(m.value - double_factorial(order - 1)) <= 4.0 * m.std_error);
  }
}

TEST_CASE("one-dimensional W_p examples") {
  const std::vector<double> a{0.0, 1.0}, b{2.0, 3.0};
  CHECK(wasserstein_1d(a, b, 1).value == doctest::Approx(2.0));
  CHECK(wasserstein_1d(a, b, 2).value == doctest::Approx(2.0));
  const std::vector<double> e{0.0, 1.0}, f{1.0, 2.0};
  CHECK(wasserstein_1d(e, f, 2).value == doctest::Approx(1.0));
  CHECK(wasserstein_1d(e, e, 2).value == 0.0);
  const std::vector<double> c{0.0, 0.0}, d{0.0, 2.0};
  CHECK(wasserstein_1d(c, d, 1).value == doctest::Approx(1.0));
  CHECK(wasserstein_1d(c, d, 2).value == doctest::Approx(std::sqrt(2.0)));
  CHECK(wasserstein_1d(c, d, 2).method == DistanceMethod::Exact1d);
  CHECK(to_string(DistanceMethod::Sliced) == "sliced");
}

TEST_CASE("unequal sample sizes use the exact quantile merge") {
  // uniform on {0, 1} against the point mass at 0.5: every unit of mass moves 0.5
  const std::vector<double> a{0.0, 1.0}, b{0.5, 0.5, 0.5};
  const DistanceEstimate e = wasserstein_1d(a, b, 2);
  CHECK(e.unequal_sizes);
  CHECK(e.value == doctest::Approx(0.5));
  // {0, 1, 2} against {0, 2}: quantile functions differ by 1 on (1/3, 1/2) and (1/2, 2/3)
  const std::vector<double> c{0.0, 1.0, 2.0}, d{0.0, 2.0};
  CHECK(wasserstein_1d(c, d, 1).value == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("assignment of a permuted copy costs nothing") {
  Positions a(2, 2), b(2, 2);
  a << 0.0, 0.0, 1.0, 0.0;
  b << 1.0, 0.0, 0.0, 0.0;
  const Assignment m = solve_assignment(pairwise_cost(a, b, 2));
  CHECK(m.cost == 0.0);
  CHECK(m.column_of_row == std::vector<Index>{1, 0});
  CHECK(assignment_exact(a, b, 2).value == 0.0);
  CHECK(solve_assignment(pairwise_cost(a, a, 2)).column_of_row == std::vector<Index>{0, 1});
}

TEST_CASE("assignment solver matches brute force over all permutations") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Positions a = gaussian(6, 2, 2 * seed), b = gaussian(6, 2, 2 * seed + 1, 2.0, 0.5);
    for (int p : {1, 2}) {
      CAPTURE(seed);
      CHECK(assignment_exact(a, b, p).value == doctest::Approx(brute_force(a, b, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("in one dimension the assignment equals the sorted coupling") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Positions a = gaussian(40, 1, 50 + seed), b = gaussian(40, 1, 80 + seed, 3.0, 1.0);
    for (int p : {1, 2})
      CHECK(assignment_exact(a, b, p).value ==
            doctest::Approx(wasserstein_1d(column(a), column(b), p).value).epsilon(1e-10));
  }
}

TEST_CASE("assignment refuses large inputs and names the alternative") {
  const Positions a = gaussian(65, 2, 1), b = gaussian(65, 2, 2);
  try {
    assignment_exact(a, b, 2);
    FAIL("expected an advisory error");
  } catch (const AdvisoryError& e) {
    CHECK(std::string(e.what()).find("sliced") != std::string::npos);
  }
  CHECK_NOTHROW(assignment_exact(gaussian(64, 2, 1), gaussian(64, 2, 2), 2));
}

TEST_CASE("W_2 is a metric that scales with its argument") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Positions a = gaussian(12, 2, 3 * seed), b = gaussian(12, 2, 3 * seed + 1, 2.0),
                    c = gaussian(12, 2, 3 * seed + 2, 0.5, 1.0);
    const double ab = assignment_exact(a, b, 2).value, bc = assignment_exact(b, c, 2).value,
                 ac = assignment_exact(a, c, 2).value;
    CHECK(ac <= ab + bc + 1e-12);
    CHECK(assignment_exact(a, a, 2).value == 0.0);
    CHECK(assignment_exact(b, a, 2).value == doctest::Approx(ab));
    const Positions a3 = 3.0 * a, b3 = 3.0 * b;
    CHECK(assignment_exact(a3, b3, 2).value == doctest::Approx(3.0 * ab));
  }
}

TEST_CASE("sliced W_2") {
  const Positions a = gaussian(50, 3, 9);
  CHECK(sliced_w2(a, a, 64, 1).value == 0.0);

  // translation by v: every projection moves by <v, theta>, whose mean square is |v|^2 / d
  Vector v(3);
  v << 1.0, -2.0, 0.5;
  const Positions b = a.rowwise() + v.transpose();
  const DistanceEstimate s = sliced_w2(a, b, 4000, 2);
  CHECK(s.value * s.value == doctest::Approx(v.squaredNorm() / 3.0).epsilon(0.05));
  CHECK(s.method == DistanceMethod::Sliced);

  for (std::uint64_t k = 0; k < 100; ++k) {
    const Positions c = gaussian(16, 2, 200 + 2 * k), d = gaussian(16, 2, 201 + 2 * k, 2.0);
    CHECK(sliced_w2(c, d, 50, k).value <= assignment_exact(c, d, 2).value + 1e-12);
  }
  CHECK(sliced_w2(a, b, 64, 5).value == sliced_w2(a, b, 64, 5).value);
  CHECK_THROWS_AS(sliced_w2(gaussian(5, 1, 1), gaussian(5, 1, 2), 10, 1), std::invalid_argument);
}

TEST_CASE("the synchronous coupling bounds W_2 from above") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Positions a = gaussian(20, 2, 5 * seed), b = gaussian(20, 2, 5 * seed + 1, 2.0);
    CHECK(assignment_exact(a, b, 2).value <= std::sqrt(coupled_distance_sq(a, b)) + 1e-12);
  }
}

TEST_CASE("exponential square moment") {
  const ContractionConstants k{1.0, 0.0, 2.0, 1.0};
  const std::vector<double> zeros(100, 0.0);
  const ExpMomentEstimate e = exp_square_moment(zeros, 0.1, k);
  CHECK(e.value == 1.0);
  CHECK(e.mean == 1.0);
  CHECK(!e.heavy_tail);
  // delta must stay below lambda / (2 A) = 0.25
  CHECK_THROWS_AS(exp_square_moment(zeros, 0.25, k), std::domain_error);
  CHECK_THROWS_AS(exp_square_moment(zeros, 0.0, k), std::domain_error);

  // one huge sample dominates the mean
  std::vector<double> skewed(100, 0.0);
  skewed[0] = 100.0;
  CHECK(exp_square_moment(skewed, 0.2, k).heavy_tail);

  // bound: 1 + K exp(delta K / (lambda - 2 delta A)), K = A d + C + 1
  const ContractionConstants k2{2.0, 1.0, 2.0, 3.0};
  const double K = 2.0 * 3.0 + 1.0 + 1.0;
  CHECK(exp_square_moment_bound(k2, 0.1) == doctest::Approx(1.0 + K * std::exp(0.1 * K / (2.0 - 0.4))));
  CHECK(std::isinf(exp_square_moment_bound(k2, 0.5)));
  CHECK(t1_constant_from_moment(0.5, std::exp(1.0)) == doctest::Approx(8.0));
}

TEST_CASE("statistics helpers") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(mean(v) == 2.5);
  CHECK(sample_variance(v) == doctest::Approx(5.0 / 3.0));
  CHECK(median(v) == 2.5);
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0}, y{1.0, 3.0, 5.0, 7.0};
  const LinearFit f = least_squares(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(student_t_critical(10, 0.95) == doctest::Approx(2.228138851986274));
  const std::vector<double> centered{-1.0, 1.0, -0.5, 0.5};
  CHECK(zero_mean_test(centered).accepted);
  const std::vector<double> shifted{10.0, 10.1, 9.9, 10.05};
  CHECK(!zero_mean_test(shifted).accepted);
}
