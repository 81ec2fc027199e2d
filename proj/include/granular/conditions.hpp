#pragma once

#include "granular/potential.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace granular {

/// Outcome of checking a structural condition on a finite probe set.
/// worst_violation is the largest (required bound - observed value) over the
/// probes; the condition holds on the probes iff it is <= the tolerance
/// stored in fitted_constants["tolerance"].
struct ConditionReport {
  std::string condition_name;  // "A3", "A4_conv_at_infinity" or "C_A_alpha"
  std::map<std::string, double> fitted_constants;
  double worst_violation = 0.0;
  long probe_count = 0;
  double probe_extent = 0.0;

  double tolerance() const;
  bool satisfied() const { return worst_violation <= tolerance(); }

  friend bool operator==(const ConditionReport&, const ConditionReport&) = default;
};

struct ProbeOptions {
  Index dim = 1;
  std::uint64_t seed = 0;
  double relative_tolerance = 1e-9;
};

/// Probe pairs (x_k, y_k): rows of `x` and `y`.
struct ProbePairs {
  Positions x;
  Positions y;
};

/// Three quarters of the pairs come from a seed-rotated Kronecker sequence
/// in [-extent, extent]^{2d}; the rest are near-diagonal pairs
/// y = x + delta e_k with delta in {1e-4, 1e-3, 1e-2, 1e-1, 0.5}.
ProbePairs make_probe_pairs(long probes, double extent, Index dim, std::uint64_t seed);

/// (x - y).(grad W(x) - grad W(y)) >= A eps^alpha (|x - y|^2 - eps^2) for
/// every probe and every eps of eps_grid. Also reports A_max, the largest A
/// the probes allow.
ConditionReport check_condition_C(const Potential& w, double A, double alpha, long probes, double extent,
                                  const std::vector<double>& eps_grid, const ProbeOptions& options = {});

/// Fits (lambda, C) in (x - y).(grad W(x) - grad W(y)) >= lambda |x - y|^2 - C.
///
/// lambda is the largest value (log grid on [1e-3, 1e3], then bisection)
/// whose C(lambda) = max_probes(lambda |x - y|^2 - observed) is saturated,
/// i.e. does not grow when the probe set is doubled in size, and stays
/// within lambda * 1 + C(0): the violation lives in a bounded core.
ConditionReport check_convexity_at_infinity(const Potential& w, long probes, double extent,
                                            const ProbeOptions& options = {});

/// Checks given (lambda, C) instead of fitting them.
ConditionReport check_convexity_at_infinity(const Potential& w, double lambda, double C, long probes,
                                            double extent, const ProbeOptions& options = {});

/// Fits the smallest C_hat with
///   |grad W(x) - grad W(y)| <= C_hat (|x - y| ^ 1) (1 + |x|^m + |y|^m).
/// Finite on any bounded probe set, so "satisfied" means saturated: C_hat on
/// the probes does not exceed 1.5 times C_hat on the probes scaled by 1/2.
/// worst_violation = C_hat - 1.5 C_hat_half.
ConditionReport check_polynomial_growth(const Potential& w, int m, long probes, double extent,
                                        const ProbeOptions& options = {});

}  // namespace granular
