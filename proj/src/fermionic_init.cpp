#include "ppmb/fermionic_init.hpp"

#include <cmath>
#include <string>

#include "ppmb/errors.hpp"

namespace ppmb {

AtomicDensity AtomicDensity::from_populations(double rho11, Complex rho12) {
  return AtomicDensity{rho11, rho12, std::conj(rho12), 1.0 - rho11};
}

void AtomicDensity::validate(double tol) const {
  if (std::abs(rho11.imag()) > tol || std::abs(rho22.imag()) > tol) {
    throw DomainError("atomic density: diagonal entries must be real");
  }
  if (std::abs(rho12 - std::conj(rho21)) > tol) {
    throw DomainError("atomic density: rho12 must equal conj(rho21)");
  }
  if (std::abs(rho11.real() + rho22.real() - 1.0) > tol) {
    throw DomainError("atomic density: trace must be one");
  }
  if (rho11.real() < -tol || rho22.real() < -tol ||
      rho11.real() * rho22.real() - std::norm(rho12) < -tol) {
    throw DomainError("atomic density: matrix is not positive semidefinite");
  }
}

Eigen::Matrix2cd AtomicDensity::matrix() const {
  Eigen::Matrix2cd m;
  m << rho11, rho12, rho21, rho22;
  return m;
}

std::size_t InitDistribution::pick(double u) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    acc += points[i].weight;
    if (u < acc && points[i].weight > 0.0) return i;
  }
  // Rounding in the cumulative sum; fall back to the last point with weight.
  for (std::size_t i = points.size(); i-- > 0;) {
    if (points[i].weight > 0.0) return i;
  }
  return points.size() - 1;
}

Eigen::Matrix2cd fermionic_kernel(const BasisFamily& family, Complex z, Complex w) {
  const Complex h = family.at(z).h;
  const Complex ht = family.tilde_at(w).h;
  const Complex den = 1.0 + h * ht;
  if (std::abs(den) < kPoleFloor) throw PoleError("fermionic kernel: 1 + h*htilde vanishes");
  Eigen::Matrix2cd m;
  m << 1.0, ht, h, h * ht;
  return m / den;
}

namespace {

// Solves htilde(w) = target: w = conj(invert_h(conj(target))).
Complex invert_tilde(const BasisFamily& family, Complex target) {
  return std::conj(family.invert(std::conj(target)));
}

}  // namespace

InitDistribution init_points(const AtomicDensity& rho, const BasisFamily& family) {
  rho.validate(1e-9);
  const double p = rho.rho11.real();
  if (p <= 0.0 || p >= 1.0) {
    throw DomainError("fermionic init requires 0 < rho11 < 1 (got " + std::to_string(p) + ")");
  }
  const double r = std::abs(rho.rho12);
  const double phi = r > 0.0 ? std::arg(rho.rho12) : 0.0;
  const double K = std::sqrt(1.0 / p - 1.0);
  const double q = r * (1.0 + K * K) / K;
  if (q > 1.0 + 1e-12) {
    throw DomainError("fermionic init: q = " + std::to_string(q) +
                      " > 1, density matrix is not positive semidefinite");
  }
  const double q1 = std::min(q, 1.0);
  const double rest = 0.5 * (1.0 - q1);

  const Complex phase = std::polar(1.0, phi);
  InitDistribution dist;
  dist.points[0] = {q1, family.invert(K * std::conj(phase)), invert_tilde(family, K * phase)};
  dist.points[1] = {rest, family.invert(K), invert_tilde(family, K)};
  dist.points[2] = {rest, family.invert(-K), invert_tilde(family, -K)};
  return dist;
}

}  // namespace ppmb
