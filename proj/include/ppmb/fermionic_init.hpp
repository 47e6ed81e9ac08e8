#pragma once

#include <array>

#include "ppmb/basis_family.hpp"
#include "ppmb/types.hpp"

namespace ppmb {

/// 2x2 atomic density matrix in the (down, up) basis.
struct AtomicDensity {
  Complex rho11;
  Complex rho12;
  Complex rho21;
  Complex rho22;

  /// Builds a valid density from rho11 and rho12; rho22 and rho21 are derived.
  static AtomicDensity from_populations(double rho11, Complex rho12);

  /// Throws DomainError unless Hermitian, trace one and positive semidefinite.
  void validate(double tol = 1e-12) const;

  Eigen::Matrix2cd matrix() const;
};

struct InitPoint {
  double weight;
  Complex z;
  Complex w;
};

/// Three-point distribution sum_i q_i delta(z - z_i) delta(w - w_i) whose
/// kernel average reproduces a given AtomicDensity.
struct InitDistribution {
  std::array<InitPoint, 3> points;

  /// Picks a point index from a uniform variate u in [0, 1).
  std::size_t pick(double u) const;
};

/// Fermionic kernel Lambda_A(z, w) as a 2x2 matrix in the (down, up) basis.
Eigen::Matrix2cd fermionic_kernel(const BasisFamily& family, Complex z, Complex w);

/// Constructs the three-point initial distribution.
///
/// With p = rho11, rho12 = r e^{i phi}: K = sqrt(1/p - 1), q = r (1 + K^2) / K,
/// weights (q, (1-q)/2, (1-q)/2) and points with
/// h(z1) = K e^{-i phi}, htilde(w1) = K e^{i phi}, h = htilde = K, h = htilde = -K.
InitDistribution init_points(const AtomicDensity& rho, const BasisFamily& family);

}  // namespace ppmb
