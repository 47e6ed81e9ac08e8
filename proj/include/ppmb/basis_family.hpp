#pragma once

#include <string_view>

#include "ppmb/types.hpp"

namespace ppmb {

enum class FamilyKind { CoherentSpin, AdditiveNoise };

/// Value of a basis function together with the derivative ratios that the
/// drift and diffusion formulas need. The ratios are evaluated in closed form
/// so that e.g. (h^2-1)/h' is exactly delta for the additive-noise family.
struct BasisPoint {
  Complex h;
  Complex dh;          // h'
  Complex h_over_dh;   // h / h'
  Complex sq_over_dh;  // (h^2 - 1) / h'
  Complex inv_dh;      // 1 / h'
};

/// Four-tuple returned by eval(): h(z), h'(z), htilde(w), htilde'(w).
struct BasisEval {
  Complex h;
  Complex h_prime;
  Complex htilde;
  Complex htilde_prime;
};

/// Nonorthogonal two-level basis states |z> = f(z)|down> + g(z)|up>,
/// characterised by h = g/f.
///
/// CoherentSpin uses f = 1, g = z, hence h(z) = z.
/// AdditiveNoise uses h(z) = (1 - e^u) / (1 + e^u), u = 2z/delta + kappa,
/// which solves delta h' = h^2 - 1.
///
/// The tilde functions are htilde(w) = conj(h(conj(w))), i.e. the same family
/// with conjugated parameters.
class BasisFamily {
 public:
  static BasisFamily coherent_spin();
  static BasisFamily additive_noise(Complex delta, Complex kappa = {0.0, 0.0});

  FamilyKind kind() const { return kind_; }
  Complex delta() const { return delta_; }
  Complex kappa() const { return kappa_; }
  std::string_view name() const;

  /// Family whose h equals this family's htilde.
  BasisFamily conjugated() const;

  BasisPoint at(Complex z) const;
  BasisPoint tilde_at(Complex w) const { return conjugated().at(w); }

  /// h''(z).
  Complex second_derivative(Complex z) const;

  /// Solves h(z) = target on the principal logarithm branch.
  Complex invert(Complex target) const;

  bool operator==(const BasisFamily&) const = default;

 private:
  BasisFamily(FamilyKind kind, Complex delta, Complex kappa)
      : kind_(kind), delta_(delta), kappa_(kappa) {}

  FamilyKind kind_;
  Complex delta_;
  Complex kappa_;
};

BasisEval eval(const BasisFamily& family, Complex z, Complex w);

Complex invert_h(const BasisFamily& family, Complex target);

/// Parses "coherent-spin" | "additive-noise".
FamilyKind parse_family_kind(std::string_view name);

}  // namespace ppmb
