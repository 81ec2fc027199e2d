#pragma once

#include "granular/types.hpp"

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace granular {

enum class PotentialKind { Zero, Quadratic, PowerLaw, UniformPlusBump, Sampled };

std::string_view to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(std::string_view name);

/// A confinement or interaction potential together with the structural
/// constants it declares. All built-in kinds are even, so their gradients
/// are odd: grad(-x) == -grad(x) bit for bit.
///
/// Kinds:
///   Zero                 Phi = 0
///   Quadratic(k)         Phi = k |x|^2
///   PowerLaw(p)          Phi = |x|^p, p >= 2
///   UniformPlusBump      Phi = k |x|^2 + a (1 - |x|^2/rho^2)^3 on |x| < rho
///   Sampled              Phi = sum_k w(x_k), w' tabulated on a regular grid of
///                        [0, R] and extended oddly to [-R, R]
struct Potential {
  PotentialKind kind = PotentialKind::Zero;

  double stiffness = 0.0;
  double exponent = 2.0;
  double bump_amplitude = 0.0;
  double bump_radius = 1.0;
  double spacing = 0.0;
  std::vector<double> profile;  // tabulated w' at 0, h, 2h, ...; profile[0] is forced to 0

  int growth_m = 1;
  double declared_lambda = 0.0;
  double declared_C = 0.0;
  double declared_A = 0.0;
  double declared_alpha = 0.0;

  static Potential zero();
  static Potential quadratic(double stiffness);
  static Potential power_law(double exponent);
  static Potential uniform_plus_bump(double stiffness, double amplitude, double radius);
  static Potential sampled(double spacing, std::vector<double> profile);

  bool is_zero() const { return kind == PotentialKind::Zero; }
  double sampled_range() const { return spacing * static_cast<double>(profile.size() - 1); }

  friend bool operator==(const Potential&, const Potential&) = default;
};

namespace detail {

// |x|^(p-2) from r2 = |x|^2, exact for the common even exponents.
inline double radial_power(double r2, double p) {
  if (p == 2.0) return 1.0;
  if (p == 4.0) return r2;
  if (p == 6.0) return r2 * r2;
  if (p == 3.0) return std::sqrt(r2);
  return std::pow(r2, 0.5 * (p - 2.0));
}

[[noreturn]] void throw_out_of_range(const Potential& w, Index coord, double value);

inline double sampled_slope(const Potential& w, double s) {
  const double pos = s / w.spacing;
  const auto last = static_cast<Index>(w.profile.size()) - 1;
  auto i = static_cast<Index>(pos);
  if (i >= last) return w.profile[static_cast<std::size_t>(last)];
  const double t = pos - static_cast<double>(i);
  const double lo = i == 0 ? 0.0 : w.profile[static_cast<std::size_t>(i)];
  return lo + t * (w.profile[static_cast<std::size_t>(i + 1)] - lo);
}

inline double sampled_primitive(const Potential& w, double s) {
  // integral of the piecewise linear slope from 0 to s
  double acc = 0.0;
  const double h = w.spacing;
  const auto last = static_cast<Index>(w.profile.size()) - 1;
  Index i = 0;
  auto node = [&](Index k) { return k == 0 ? 0.0 : w.profile[static_cast<std::size_t>(k)]; };
  while (i < last && static_cast<double>(i + 1) * h <= s) {
    acc += 0.5 * h * (node(i) + node(i + 1));
    ++i;
  }
  if (i < last) {
    const double t = (s - static_cast<double>(i) * h) / h;
    acc += h * t * (node(i) + 0.5 * t * (node(i + 1) - node(i)));
  }
  return acc;
}

}  // namespace detail

/// Writes grad(Phi)(x) into `out`. `x` and `out` may be any Eigen vector
/// expressions of equal size (rows of a RowMajor matrix included); nothing
/// is allocated.
template <typename In, typename Out>
void grad_to(const Potential& w, const Eigen::MatrixBase<In>& x, const Eigen::MatrixBase<Out>& out_) {
  using Scalar = typename In::Scalar;
  auto& out = const_cast<Eigen::MatrixBase<Out>&>(out_);
  switch (w.kind) {
    case PotentialKind::Zero:
      out.setZero();
      return;
    case PotentialKind::Quadratic:
      out = Scalar(2.0 * w.stiffness) * x;
      return;
    case PotentialKind::PowerLaw: {
      const Scalar r2 = x.squaredNorm();
      if (r2 == Scalar(0)) {
        out.setZero();
        return;
      }
      out = Scalar(w.exponent * detail::radial_power(static_cast<double>(r2), w.exponent)) * x;
      return;
    }
    case PotentialKind::UniformPlusBump: {
      const Scalar r2 = x.squaredNorm();
      const double rho2 = w.bump_radius * w.bump_radius;
      double factor = 2.0 * w.stiffness;
      if (static_cast<double>(r2) < rho2) {
        const double s = 1.0 - static_cast<double>(r2) / rho2;
        factor -= 6.0 * w.bump_amplitude / rho2 * s * s;
      }
      out = Scalar(factor) * x;
      return;
    }
    case PotentialKind::Sampled: {
      const double range = w.sampled_range();
      for (Index k = 0; k < x.size(); ++k) {
        const double v = static_cast<double>(x(k));
        const double s = std::abs(v);
        if (!(s <= range)) detail::throw_out_of_range(w, k, v);
        const double g = detail::sampled_slope(w, s);
        out(k) = Scalar(v < 0.0 ? -g : (v > 0.0 ? g : 0.0));
      }
      return;
    }
  }
}

template <typename In>
VectorT<typename In::Scalar> grad(const Potential& w, const Eigen::MatrixBase<In>& x) {
  VectorT<typename In::Scalar> out(x.size());
  grad_to(w, x.derived().reshaped(), out);
  return out;
}

/// Phi(x). Used for finite-difference checks; the dynamics only need grad.
template <typename In>
typename In::Scalar value(const Potential& w, const Eigen::MatrixBase<In>& x) {
  using Scalar = typename In::Scalar;
  switch (w.kind) {
    case PotentialKind::Zero:
      return Scalar(0);
    case PotentialKind::Quadratic:
      return Scalar(w.stiffness) * x.squaredNorm();
    case PotentialKind::PowerLaw:
      return Scalar(std::pow(static_cast<double>(x.squaredNorm()), 0.5 * w.exponent));
    case PotentialKind::UniformPlusBump: {
      const double r2 = static_cast<double>(x.squaredNorm());
      const double rho2 = w.bump_radius * w.bump_radius;
      double v = w.stiffness * r2;
      if (r2 < rho2) {
        const double s = 1.0 - r2 / rho2;
        v += w.bump_amplitude * s * s * s;
      }
      return Scalar(v);
    }
    case PotentialKind::Sampled: {
      double v = 0.0;
      for (Index k = 0; k < x.size(); ++k) {
        const double s = std::abs(static_cast<double>(x(k)));
        if (!(s <= w.sampled_range())) detail::throw_out_of_range(w, k, static_cast<double>(x(k)));
        v += detail::sampled_primitive(w, s);
      }
      return Scalar(v);
    }
  }
  return Scalar(0);
}

}  // namespace granular
