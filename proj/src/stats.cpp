#include "granular/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace granular {

double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of an empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

double standard_error(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least_squares needs >= 2 paired points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("least_squares needs distinct abscissae");
  LinearFit fit;
  fit.points = static_cast<long>(x.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double r = y[k] - fit.intercept - fit.slope * x[k];
      rss += r * r;
    }
    fit.slope_std_error = std::sqrt(rss / static_cast<double>(x.size() - 2) / sxx);
  }
  return fit;
}

double student_t_critical(double df, double confidence) {
  const boost::math::students_t dist(df);
  return boost::math::quantile(dist, 0.5 + 0.5 * confidence);
}

ZeroMeanTest zero_mean_test(std::span<const double> values, double confidence) {
  if (values.size() < 2) throw std::invalid_argument("zero_mean_test needs >= 2 values");
  ZeroMeanTest t;
  t.mean = mean(values);
  t.std_error = standard_error(values);
  t.critical = student_t_critical(static_cast<double>(values.size() - 1), confidence);
  t.t = t.std_error > 0.0 ? t.mean / t.std_error : (t.mean == 0.0 ? 0.0 : INFINITY);
  t.accepted = std::abs(t.t) <= t.critical;
  return t;
}

}  // namespace granular
