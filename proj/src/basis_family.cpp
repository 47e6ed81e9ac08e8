#include "ppmb/basis_family.hpp"

#include <cmath>
#include <string>

#include "ppmb/errors.hpp"

namespace ppmb {

BasisFamily BasisFamily::coherent_spin() {
  return BasisFamily(FamilyKind::CoherentSpin, 0.0, 0.0);
}

BasisFamily BasisFamily::additive_noise(Complex delta, Complex kappa) {
  if (delta == Complex(0.0, 0.0)) {
    throw DomainError("additive-noise family requires delta != 0");
  }
  return BasisFamily(FamilyKind::AdditiveNoise, delta, kappa);
}

std::string_view BasisFamily::name() const {
  return kind_ == FamilyKind::CoherentSpin ? "coherent-spin" : "additive-noise";
}

BasisFamily BasisFamily::conjugated() const {
  return BasisFamily(kind_, std::conj(delta_), std::conj(kappa_));
}

BasisPoint BasisFamily::at(Complex z) const {
  if (kind_ == FamilyKind::CoherentSpin) {
    return BasisPoint{z, 1.0, z, z * z - 1.0, 1.0};
  }
  const Complex u = 2.0 * z / delta_ + kappa_;
  // |1 + e^u| only approaches zero for moderate Re(u); skip the exp when it
  // would overflow.
  if (u.real() < 700.0) {
    const Complex e = std::exp(u);
    if (std::abs(1.0 + e) < kPoleFloor) {
      throw PoleError("additive-noise basis: |1 + exp(2z/delta + kappa)| below pole floor");
    }
  }
  // (1 - e^u) / (1 + e^u) == -tanh(u/2); the tanh form stays finite for large |u|.
  const Complex h = -std::tanh(0.5 * u);
  const Complex c = std::cosh(0.5 * u);
  return BasisPoint{h, (h * h - 1.0) / delta_, 0.5 * delta_ * std::sinh(u), delta_,
                    -delta_ * c * c};
}

Complex BasisFamily::second_derivative(Complex z) const {
  if (kind_ == FamilyKind::CoherentSpin) return 0.0;
  const BasisPoint p = at(z);
  return 2.0 * p.h * p.dh / delta_;
}

Complex BasisFamily::invert(Complex target) const {
  if (kind_ == FamilyKind::CoherentSpin) return target;
  if (std::abs(target - 1.0) == 0.0 || std::abs(target + 1.0) == 0.0) {
    throw UnreachableTargetError("additive-noise basis cannot reach h = +1 or h = -1");
  }
  const Complex ratio = (1.0 - target) / (1.0 + target);
  if (ratio == Complex(0.0, 0.0) || !std::isfinite(std::abs(ratio))) {
    throw UnreachableTargetError("additive-noise basis cannot reach h = +1 or h = -1");
  }
  return 0.5 * delta_ * (std::log(ratio) - kappa_);
}

BasisEval eval(const BasisFamily& family, Complex z, Complex w) {
  const BasisPoint p = family.at(z);
  const BasisPoint q = family.tilde_at(w);
  return BasisEval{p.h, p.dh, q.h, q.dh};
}

Complex invert_h(const BasisFamily& family, Complex target) { return family.invert(target); }

FamilyKind parse_family_kind(std::string_view name) {
  if (name == "coherent-spin") return FamilyKind::CoherentSpin;
  if (name == "additive-noise") return FamilyKind::AdditiveNoise;
  throw DomainError("unknown basis family '" + std::string(name) +
                    "' (expected coherent-spin or additive-noise)");
}

}  // namespace ppmb
