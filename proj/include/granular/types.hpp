#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace granular {

/// Particle positions, one particle per row (N x d).
template <typename Scalar>
using PositionsT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Positions = PositionsT<double>;
using Vector = VectorT<double>;
using Index = Eigen::Index;

/// A query outside the domain on which a potential is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Non-finite state or gradient met while integrating.
/// `partner` is -1 when the fault is not attributable to a pair.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, Index particle, Index partner, double time)
      : std::runtime_error(what), particle(particle), partner(partner), time(time) {}

  Index particle;
  Index partner;
  double time;
};

/// Adaptive stepping could not meet its drift cap above dt_min.
class StabilityError : public std::runtime_error {
 public:
  StabilityError(const std::string& what, Index particle, double drift_norm)
      : std::runtime_error(what), particle(particle), drift_norm(drift_norm) {}

  Index particle;
  double drift_norm;
};

/// A request that exceeds a cost guard; the message names the alternative.
class AdvisoryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace granular
