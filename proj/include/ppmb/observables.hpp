#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ppmb/basis_family.hpp"
#include "ppmb/jc_model.hpp"
#include "ppmb/sde_core.hpp"
#include "ppmb/types.hpp"

namespace ppmb {

/// Single-realisation contributions to the physical expectation values.
/// rho21 and rho12 need not be complex conjugates path by path.
struct ObservableSet {
  Complex rho21;
  Complex rho12;
  Complex nu;
  std::vector<Complex> e;  // e_n = beta_n + alpha_n
  std::vector<Complex> h;  // h_n = i (beta_n - alpha_n)

  Complex rho11() const { return 0.5 * (1.0 - nu); }
  Complex rho22() const { return 0.5 * (1.0 + nu); }
};

ObservableSet project(const BasisFamily& family, const PhaseState& state);

/// Scalar function v(x) of the SDE state with closed-form first and second
/// derivatives. gradient and hessian write into outputs of the state size.
struct ScalarObservable {
  std::string name;
  std::function<Complex(const CVector&)> value;
  std::function<void(const CVector&, CVector&)> gradient;
  std::function<void(const CVector&, CMatrix&)> hessian;
};

/// Appends sigma = v(x) as an extra coordinate driven by Ito's formula:
/// drift sum_i A_i dv_i + 1/2 sum_pq (B B^T)_pq d2v_pq, noise row sum_i B_ij dv_i.
SdeSystem extend_with_observable(const SdeSystem& system, const ScalarObservable& v);

/// v(x) = x_index.
ScalarObservable coordinate_observable(int index, int dim);

enum class FermionicQuantity { Rho21, Rho12, Nu };

/// rho21, rho12 or nu as a function of the (z, w) entries of a PhaseState
/// with `modes` bosonic pairs.
ScalarObservable fermionic_observable(const BasisFamily& family, FermionicQuantity quantity,
                                      int modes);

/// Post-hoc projections by CSV name: rho_11, rho_22, rho_21, rho_12, nu,
/// e_<n>, h_<n> (1-based), z, w.
NamedObservable phase_space_observable(const BasisFamily& family, int modes,
                                       const std::string& name);

}  // namespace ppmb
