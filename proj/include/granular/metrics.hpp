#pragma once

#include "granular/types.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace granular {

// ---------------------------------------------------------------------------
// Moments

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;  // run-to-run standard error; 0 for a single run
};

/// Time series of E|X|^{2k} or E|X^i - X^j|^{2k}.
struct MomentSeries {
  std::vector<double> times;
  int order_2k = 2;
  std::vector<double> values;
  std::vector<double> std_errors;
};

/// mean_i |x_i|^order within each run, averaged over runs.
MomentEstimate moment(std::span<const Positions> runs, int order);
MomentEstimate moment(const Positions& ensemble, int order);

/// mean over unordered pairs i != j of |x_i - x_j|^order, averaged over runs.
MomentEstimate pairwise_moment(std::span<const Positions> runs, int order);
MomentEstimate pairwise_moment(const Positions& ensemble, int order);

// ---------------------------------------------------------------------------
// Wasserstein distances between empirical measures

enum class DistanceMethod { Exact1d, AssignmentExact, Sliced, CoupledUpper };

std::string_view to_string(DistanceMethod method);

struct DistanceEstimate {
  DistanceMethod method = DistanceMethod::Exact1d;
  int p = 2;
  double value = 0.0;
  long samples_per_side = 0;
  long n_projections = 0;
  bool unequal_sizes = false;  // exact1d only: sizes differed, quantile coupling used
};

/// W_p in one dimension by the quantile coupling. Unequal sample sizes are
/// handled exactly by merging the two empirical quantile functions.
DistanceEstimate wasserstein_1d(std::span<const double> a, std::span<const double> b, int p);

struct Assignment {
  std::vector<Index> column_of_row;
  double cost = 0.0;
};

/// Minimum-cost perfect matching of a square cost matrix
/// (shortest augmenting paths with potentials, O(n^3)).
Assignment solve_assignment(const Eigen::MatrixXd& cost);

/// cost(i, j) = |a_i - b_j|^p.
Eigen::MatrixXd pairwise_cost(const Positions& a, const Positions& b, int p);

/// Largest sample count assignment_exact accepts.
inline constexpr Index kAssignmentCap = 64;

/// Exact W_p between two equal-weight empirical measures of equal size.
/// Throws AdvisoryError above kAssignmentCap points.
DistanceEstimate assignment_exact(const Positions& a, const Positions& b, int p);

/// Sliced W_2: root mean of squared 1-d W_2 over random unit directions.
/// A lower bound for W_2; requires d >= 2.
DistanceEstimate sliced_w2(const Positions& a, const Positions& b, long n_projections, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Exponential square moments

/// Constants of the contraction-at-infinity bound
///   (x - y).(b(x) - b(y)) <= -lambda |x - y|^2 + C,  sigma sigma^T <= diffusion_bound_A.
/// diffusion_bound_A is unrelated to the A of the C(A, alpha) condition.
struct ContractionConstants {
  double lambda = 0.0;
  double C = 0.0;
  double diffusion_bound_A = 2.0;
  double dim = 1.0;
};

struct ExpMomentEstimate {
  double value = 0.0;   // median of batch means
  double mean = 0.0;       // plain MC average
  double std_error = 0.0;  // standard error of `value`
  double mean_std_error = 0.0;
  double max_share = 0.0;
  bool heavy_tail = false;  // the largest single term dominates the average
  int batches = 0;
};

inline constexpr int kExpMomentBatches = 10;

/// Estimates E exp(delta |X - Y|^2) from samples of |X - Y|^2 of independent
/// copies. Refuses (std::domain_error) when delta >= lambda / (2 A), where no
/// uniform-in-time bound exists.
ExpMomentEstimate exp_square_moment(std::span<const double> squared_distances, double delta,
                                    const ContractionConstants& constants);

/// sup_t E exp(delta |X_t - Y_t|^2)
///   <= 1 + (A d + C + 1) exp(delta (A d + C + 1) / (lambda - 2 delta A)).
double exp_square_moment_bound(const ContractionConstants& constants, double delta);

/// T_1 constant c (W_1 <= sqrt(c Ent)) implied by an exponential square
/// moment bound M: c = (2 / delta) (1 + log M).
double t1_constant_from_moment(double delta, double moment_bound);

}  // namespace granular
