#include "granular/potential.hpp"

#include <sstream>

namespace granular {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

std::string_view to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::Zero: return "zero";
    case PotentialKind::Quadratic: return "quadratic";
    case PotentialKind::PowerLaw: return "power_law";
    case PotentialKind::UniformPlusBump: return "uniform_plus_bump";
    case PotentialKind::Sampled: return "sampled";
  }
  return "zero";
}

PotentialKind potential_kind_from_string(std::string_view name) {
  for (auto k : {PotentialKind::Zero, PotentialKind::Quadratic, PotentialKind::PowerLaw,
                 PotentialKind::UniformPlusBump, PotentialKind::Sampled}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown potential kind '" + std::string(name) + "'");
}

Potential Potential::zero() {
  Potential p;
  p.growth_m = 0;
  return p;
}

Potential Potential::quadratic(double stiffness) {
  require(stiffness > 0.0, "quadratic stiffness must be > 0");
  Potential p;
  p.kind = PotentialKind::Quadratic;
  p.stiffness = stiffness;
  p.growth_m = 1;
  p.declared_lambda = 2.0 * stiffness;
  p.declared_A = 2.0 * stiffness;
  return p;
}

Potential Potential::power_law(double exponent) {
  require(exponent >= 2.0 && std::isfinite(exponent), "power-law exponent must be >= 2");
  Potential p;
  p.kind = PotentialKind::PowerLaw;
  p.exponent = exponent;
  p.growth_m = static_cast<int>(std::ceil(exponent - 1.0));
  // C(A, p - 2) is tight at x = -y (one dimension), where it allows
  // A = p^2 / (2 (4 alpha / p)^(alpha / 2)).
  const double alpha = exponent - 2.0;
  p.declared_alpha = alpha;
  p.declared_A = exponent * exponent / (2.0 * std::pow(4.0 * alpha / exponent, 0.5 * alpha));
  return p;
}

Potential Potential::uniform_plus_bump(double stiffness, double amplitude, double radius) {
  require(stiffness > 0.0, "uniform part stiffness must be > 0");
  require(radius > 0.0, "bump radius must be > 0");
  require(std::isfinite(amplitude), "bump amplitude must be finite");
  Potential p;
  p.kind = PotentialKind::UniformPlusBump;
  p.stiffness = stiffness;
  p.bump_amplitude = amplitude;
  p.bump_radius = radius;
  p.growth_m = 1;
  return p;
}

Potential Potential::sampled(double spacing, std::vector<double> profile) {
  require(spacing > 0.0, "sampled spacing must be > 0");
  require(profile.size() >= 2, "sampled profile needs at least two nodes");
  for (double v : profile) require(std::isfinite(v), "sampled profile must be finite");
  Potential p;
  p.kind = PotentialKind::Sampled;
  p.spacing = spacing;
  p.profile = std::move(profile);
  p.profile.front() = 0.0;
  p.growth_m = 0;
  return p;
}

namespace detail {

void throw_out_of_range(const Potential& w, Index coord, double value) {
  std::ostringstream os;
  os << "sampled potential queried outside its table: coordinate " << coord << " = " << value
     << " not in [-" << w.sampled_range() << ", " << w.sampled_range() << "]";
  throw DomainError(os.str());
}

}  // namespace detail

}  // namespace granular
