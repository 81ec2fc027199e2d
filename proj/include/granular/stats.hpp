#pragma once

#include <span>
#include <vector>

namespace granular {

double mean(std::span<const double> v);
/// Unbiased sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> v);
/// sqrt(variance / n).
double standard_error(std::span<const double> v);
double median(std::vector<double> v);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
  long points = 0;
};

/// Ordinary least squares y = intercept + slope x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Two-sided Student t quantile: P(|T_df| <= q) = confidence.
double student_t_critical(double df, double confidence);

/// One-sample t-test of mean(values) == 0 at the given confidence.
struct ZeroMeanTest {
  double mean = 0.0;
  double std_error = 0.0;
  double t = 0.0;
  double critical = 0.0;
  bool accepted = false;
};

ZeroMeanTest zero_mean_test(std::span<const double> values, double confidence = 0.95);

}  // namespace granular
