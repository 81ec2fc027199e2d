#include "granular/ensemble.hpp"

#include "granular/rng.hpp"

#include <fstream>
#include <sstream>

namespace granular {

namespace {

Vector broadcast(const Vector& v, Index dim, const char* what) {
  if (v.size() == dim) return v;
  if (v.size() == 1) return Vector::Constant(dim, v(0));
  throw std::invalid_argument(std::string(what) + " has " + std::to_string(v.size()) +
                              " entries, expected 1 or " + std::to_string(dim));
}

}  // namespace

ParticleEnsemble make_ensemble(Positions positions, RngLineage lineage) {
  if (positions.rows() < 2) throw std::invalid_argument("an ensemble needs N >= 2 particles");
  if (positions.cols() < 1) throw std::invalid_argument("an ensemble needs dimension d >= 1");
  if (!positions.allFinite()) throw std::invalid_argument("ensemble positions must be finite");
  ParticleEnsemble e;
  e.positions = std::move(positions);
  e.lineage = lineage;
  return e;
}

void center_in_place(Positions& positions) {
  const Eigen::RowVectorXd mean = positions.colwise().mean();
  positions.rowwise() -= mean;
}

ParticleEnsemble project(ParticleEnsemble ensemble) {
  center_in_place(ensemble.positions);
  ensemble.centered = true;
  return ensemble;
}

std::string_view to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::Gaussian: return "gaussian";
    case InitialKind::Uniform: return "uniform";
    case InitialKind::TwoPoint: return "two_point";
    case InitialKind::SampleFile: return "sample_file";
  }
  return "gaussian";
}

InitialKind initial_kind_from_string(std::string_view name) {
  for (auto k : {InitialKind::Gaussian, InitialKind::Uniform, InitialKind::TwoPoint, InitialKind::SampleFile}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown initial law '" + std::string(name) + "'");
}

bool operator==(const InitialLaw& a, const InitialLaw& b) {
  auto same = [](const Vector& x, const Vector& y) { return x.size() == y.size() && x == y; };
  return a.kind == b.kind && same(a.mean, b.mean) && a.variance == b.variance && a.half_width == b.half_width &&
         same(a.point_a, b.point_a) && same(a.point_b, b.point_b) && a.weight == b.weight && a.path == b.path &&
         a.center_to_zero == b.center_to_zero;
}

Positions sample_initial(const InitialLaw& law, Index n, Index dim, std::uint64_t seed, std::uint64_t law_tag,
                         std::uint64_t stream_offset) {
  if (n < 1 || dim < 1) throw std::invalid_argument("sample_initial needs n >= 1 and dim >= 1");
  Positions x(n, dim);
  const CounterRng rng(derive_seed(seed, law_tag), RngDomain::Initial);
  switch (law.kind) {
    case InitialKind::Gaussian: {
      if (!(law.variance >= 0.0)) throw std::invalid_argument("gaussian variance must be >= 0");
      const Vector mean = broadcast(law.mean, dim, "gaussian mean");
      const double sd = std::sqrt(law.variance);
      std::vector<double> z(static_cast<std::size_t>(dim));
      for (Index i = 0; i < n; ++i) {
        rng.normals(stream_offset + static_cast<std::uint64_t>(i), 0, z);
        for (Index k = 0; k < dim; ++k) x(i, k) = mean(k) + sd * z[static_cast<std::size_t>(k)];
      }
      break;
    }
    case InitialKind::Uniform:
      if (!(law.half_width >= 0.0)) throw std::invalid_argument("uniform half width must be >= 0");
      for (Index i = 0; i < n; ++i) {
        for (Index k = 0; k < dim; ++k) {
          const double u = rng.uniform(stream_offset + static_cast<std::uint64_t>(i), 1, static_cast<std::uint64_t>(k));
          x(i, k) = law.half_width * (2.0 * u - 1.0);
        }
      }
      break;
    case InitialKind::TwoPoint: {
      if (!(law.weight >= 0.0 && law.weight <= 1.0)) throw std::invalid_argument("two-point weight must be in [0, 1]");
      const Vector a = broadcast(law.point_a, dim, "two-point point_a");
      const Vector b = broadcast(law.point_b, dim, "two-point point_b");
      for (Index i = 0; i < n; ++i) {
        const double u = rng.uniform(stream_offset + static_cast<std::uint64_t>(i), 2, 0);
        x.row(i) = (u < law.weight ? a : b).transpose();
      }
      break;
    }
    case InitialKind::SampleFile: {
      const Positions all = read_sample_file(law.path, dim);
      const Index first = static_cast<Index>(stream_offset);
      if (all.rows() < first + n) {
        throw std::invalid_argument("sample file '" + law.path + "' has " + std::to_string(all.rows()) +
                                    " rows, need " + std::to_string(first + n));
      }
      x = all.middleRows(first, n);
      break;
    }
  }
  if (law.center_to_zero) center_in_place(x);
  return x;
}

Positions read_sample_file(const std::string& path, Index dim) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open sample file '" + path + "'");
  std::vector<double> values;
  std::string line;
  Index rows = 0;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    double v = 0.0;
    Index cols = 0;
    while (ls >> v) {
      values.push_back(v);
      ++cols;
    }
    if (cols == 0) continue;
    if (cols != dim) {
      throw std::invalid_argument("sample file '" + path + "' row " + std::to_string(rows + 1) + " has " +
                                  std::to_string(cols) + " columns, expected " + std::to_string(dim));
    }
    ++rows;
  }
  Positions x(rows, dim);
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < dim; ++k) x(i, k) = values[static_cast<std::size_t>(i * dim + k)];
  return x;
}

}  // namespace granular
