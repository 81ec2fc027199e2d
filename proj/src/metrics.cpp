#include "granular/metrics.hpp"

#include "granular/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace granular {

namespace {

double power_of_norm(double r2, int order) {
  if (order == 2) return r2;
  if (order % 2 == 0) {
    double v = 1.0;
    for (int k = 0; k < order / 2; ++k) v *= r2;
    return v;
  }
  return std::pow(std::sqrt(r2), order);
}

double distance_power(double dist, int p) {
  if (p == 1) return dist;
  if (p == 2) return dist * dist;
  return std::pow(dist, p);
}

MomentEstimate across_runs(const std::vector<double>& per_run) {
  MomentEstimate m;
  const double r = static_cast<double>(per_run.size());
  m.value = std::accumulate(per_run.begin(), per_run.end(), 0.0) / r;
  if (per_run.size() > 1) {
    double ss = 0.0;
    for (double v : per_run) ss += (v - m.value) * (v - m.value);
    m.std_error = std::sqrt(ss / (r - 1.0) / r);
  }
  return m;
}

void require_order(int order) {
  if (order < 1) throw std::invalid_argument("moment order must be >= 1");
}

}  // namespace

MomentEstimate moment(std::span<const Positions> runs, int order) {
  require_order(order);
  if (runs.empty()) throw std::invalid_argument("moment needs at least one run");
  std::vector<double> per_run;
  per_run.reserve(runs.size());
  for (const Positions& x : runs) {
    double acc = 0.0;
    for (Index i = 0; i < x.rows(); ++i) acc += power_of_norm(x.row(i).squaredNorm(), order);
    per_run.push_back(acc / static_cast<double>(x.rows()));
  }
  return across_runs(per_run);
}

MomentEstimate moment(const Positions& ensemble, int order) { return moment(std::span(&ensemble, 1), order); }

MomentEstimate pairwise_moment(std::span<const Positions> runs, int order) {
  require_order(order);
  if (runs.empty()) throw std::invalid_argument("pairwise_moment needs at least one run");
  std::vector<double> per_run;
  per_run.reserve(runs.size());
  for (const Positions& x : runs) {
    if (x.rows() < 2) throw std::invalid_argument("pairwise_moment needs N >= 2");
    double acc = 0.0;
    for (Index i = 0; i < x.rows(); ++i)
      for (Index j = i + 1; j < x.rows(); ++j) acc += power_of_norm((x.row(i) - x.row(j)).squaredNorm(), order);
    per_run.push_back(acc / (0.5 * static_cast<double>(x.rows() * (x.rows() - 1))));
  }
  return across_runs(per_run);
}

MomentEstimate pairwise_moment(const Positions& ensemble, int order) {
  return pairwise_moment(std::span(&ensemble, 1), order);
}

std::string_view to_string(DistanceMethod method) {
  switch (method) {
    case DistanceMethod::Exact1d: return "exact-1d";
    case DistanceMethod::AssignmentExact: return "assignment-exact";
    case DistanceMethod::Sliced: return "sliced";
    case DistanceMethod::CoupledUpper: return "coupled-upper";
  }
  return "exact-1d";
}

DistanceEstimate wasserstein_1d(std::span<const double> a, std::span<const double> b, int p) {
  if (p != 1 && p != 2) throw std::invalid_argument("wasserstein_1d supports p = 1 or 2");
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein_1d needs non-empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  DistanceEstimate est;
  est.method = DistanceMethod::Exact1d;
  est.p = p;
  est.samples_per_side = static_cast<long>(std::max(sa.size(), sb.size()));
  double mean_cost = 0.0;
  if (sa.size() == sb.size()) {
    for (std::size_t i = 0; i < sa.size(); ++i) mean_cost += distance_power(std::abs(sa[i] - sb[i]), p);
    mean_cost /= static_cast<double>(sa.size());
  } else {
    // integrate |F_a^{-1}(u) - F_b^{-1}(u)|^p over the merged breakpoints
    est.unequal_sizes = true;
    const auto na = static_cast<std::uint64_t>(sa.size());
    const auto nb = static_cast<std::uint64_t>(sb.size());
    std::uint64_t i = 0;
    std::uint64_t j = 0;
    double u = 0.0;
    while (i < na && j < nb) {
      const std::uint64_t edge_a = (i + 1) * nb;  // (i+1)/na scaled by na*nb
      const std::uint64_t edge_b = (j + 1) * na;
      const std::uint64_t edge = std::min(edge_a, edge_b);
      const double next_u = static_cast<double>(edge) / static_cast<double>(na * nb);
      mean_cost += (next_u - u) * distance_power(std::abs(sa[i] - sb[j]), p);
      u = next_u;
      if (edge_a == edge) ++i;
      if (edge_b == edge) ++j;
    }
  }
  est.value = p == 1 ? mean_cost : std::sqrt(mean_cost);
  return est;
}

Assignment solve_assignment(const Eigen::MatrixXd& cost) {
  const Index n = cost.rows();
  if (cost.cols() != n) throw std::invalid_argument("assignment needs a square cost matrix");
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is the virtual source
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Index> row_of_col(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (Index i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = row_of_col[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (used[sj]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[sj];
        if (cur < minv[sj]) {
          minv[sj] = cur;
          way[sj] = j0;
        }
        if (minv[sj] < delta) {
          delta = minv[sj];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (used[sj]) {
          u[static_cast<std::size_t>(row_of_col[sj])] += delta;
          v[sj] -= delta;
        } else {
          minv[sj] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      row_of_col[static_cast<std::size_t>(j0)] = row_of_col[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment out;
  out.column_of_row.assign(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j) out.column_of_row[static_cast<std::size_t>(row_of_col[static_cast<std::size_t>(j)] - 1)] = j - 1;
  for (Index i = 0; i < n; ++i) out.cost += cost(i, out.column_of_row[static_cast<std::size_t>(i)]);
  return out;
}

Eigen::MatrixXd pairwise_cost(const Positions& a, const Positions& b, int p) {
  if (a.cols() != b.cols()) throw std::invalid_argument("samples differ in dimension");
  Eigen::MatrixXd c(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j) {
      const double r2 = (a.row(i) - b.row(j)).squaredNorm();
      c(i, j) = p == 2 ? r2 : distance_power(std::sqrt(r2), p);
    }
  return c;
}

DistanceEstimate assignment_exact(const Positions& a, const Positions& b, int p) {
  if (p != 1 && p != 2) throw std::invalid_argument("assignment_exact supports p = 1 or 2");
  if (a.rows() != b.rows()) throw std::invalid_argument("assignment_exact needs equal sample counts");
  if (a.rows() > kAssignmentCap) {
    std::ostringstream os;
    os << "assignment_exact is capped at " << kAssignmentCap << " points per side (got " << a.rows()
       << "); use sliced_w2 for a scalable lower bound";
    throw AdvisoryError(os.str());
  }
  if (a.rows() == 0) throw std::invalid_argument("assignment_exact needs non-empty samples");
  const Assignment match = solve_assignment(pairwise_cost(a, b, p));
  DistanceEstimate est;
  est.method = DistanceMethod::AssignmentExact;
  est.p = p;
  est.samples_per_side = static_cast<long>(a.rows());
  const double mean_cost = std::max(0.0, match.cost) / static_cast<double>(a.rows());
  est.value = p == 1 ? mean_cost : std::sqrt(mean_cost);
  return est;
}

DistanceEstimate sliced_w2(const Positions& a, const Positions& b, long n_projections, std::uint64_t seed) {
  if (a.cols() < 2 || b.cols() != a.cols()) throw std::invalid_argument("sliced_w2 needs matching dimension d >= 2");
  if (n_projections < 1) throw std::invalid_argument("sliced_w2 needs at least one projection");
  const CounterRng rng(seed, RngDomain::Sliced);
  const Index d = a.cols();
  Vector dir(d);
  Vector pa(a.rows()), pb(b.rows());
  double acc = 0.0;
  for (long k = 0; k < n_projections; ++k) {
    do {
      rng.normals(static_cast<std::uint64_t>(k), 0, std::span<double>(dir.data(), static_cast<std::size_t>(d)));
    } while (dir.squaredNorm() == 0.0);
    dir.normalize();
    pa = a * dir;
    pb = b * dir;
    const double w = wasserstein_1d(std::span<const double>(pa.data(), static_cast<std::size_t>(pa.size())),
                                    std::span<const double>(pb.data(), static_cast<std::size_t>(pb.size())), 2)
                         .value;
    acc += w * w;
  }
  DistanceEstimate est;
  est.method = DistanceMethod::Sliced;
  est.p = 2;
  est.value = std::sqrt(acc / static_cast<double>(n_projections));
  est.samples_per_side = static_cast<long>(std::max(a.rows(), b.rows()));
  est.n_projections = n_projections;
  return est;
}

ExpMomentEstimate exp_square_moment(std::span<const double> squared_distances, double delta,
                                    const ContractionConstants& constants) {
  const double limit = constants.lambda / (2.0 * constants.diffusion_bound_A);
  if (!(delta > 0.0) || !(delta < limit)) {
    std::ostringstream os;
    os << "exp_square_moment: delta = " << delta << " is outside (0, lambda / (2 A)) = (0, " << limit
       << "); no uniform-in-time bound holds there";
    throw std::domain_error(os.str());
  }
  if (squared_distances.empty()) throw std::invalid_argument("exp_square_moment needs samples");
  const std::size_t n = squared_distances.size();
  std::vector<double> terms(n);
  std::transform(squared_distances.begin(), squared_distances.end(), terms.begin(),
                 [delta](double s) { return std::exp(delta * s); });

  ExpMomentEstimate est;
  const double total = std::accumulate(terms.begin(), terms.end(), 0.0);
  est.mean = total / static_cast<double>(n);
  double ss = 0.0;
  for (double t : terms) ss += (t - est.mean) * (t - est.mean);
  est.mean_std_error = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  est.max_share = *std::max_element(terms.begin(), terms.end()) / total;
  est.heavy_tail = n > 1 && est.max_share > 0.25;

  const std::size_t batches = std::min<std::size_t>(kExpMomentBatches, n);
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t lo = b * n / batches;
    const std::size_t hi = (b + 1) * n / batches;
    means[b] = std::accumulate(terms.begin() + static_cast<std::ptrdiff_t>(lo),
                               terms.begin() + static_cast<std::ptrdiff_t>(hi), 0.0) /
               static_cast<double>(hi - lo);
  }
  est.batches = static_cast<int>(batches);
  std::vector<double> sorted = means;
  std::sort(sorted.begin(), sorted.end());
  est.value = batches % 2 == 1 ? sorted[batches / 2] : 0.5 * (sorted[batches / 2 - 1] + sorted[batches / 2]);
  if (batches > 1) {
    const double bm = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(batches);
    double bss = 0.0;
    for (double m : means) bss += (m - bm) * (m - bm);
    // asymptotic efficiency of the median of normal batch means
    est.std_error = std::sqrt(M_PI / 2.0) * std::sqrt(bss / static_cast<double>(batches - 1)) /
                    std::sqrt(static_cast<double>(batches));
  }
  return est;
}

double exp_square_moment_bound(const ContractionConstants& k, double delta) {
  const double gap = k.lambda - 2.0 * delta * k.diffusion_bound_A;
  if (!(gap > 0.0)) return std::numeric_limits<double>::infinity();
  const double base = k.diffusion_bound_A * k.dim + k.C + 1.0;
  return 1.0 + base * std::exp(delta * base / gap);
}

double t1_constant_from_moment(double delta, double moment_bound) {
  if (!(delta > 0.0) || !(moment_bound >= 1.0)) throw std::invalid_argument("t1_constant_from_moment: bad input");
  return 2.0 / delta * (1.0 + std::log(moment_bound));
}

}  // namespace granular
