#pragma once

#include "ppmb/basis_family.hpp"
#include "ppmb/jc_model.hpp"
#include "ppmb/model_params.hpp"
#include "ppmb/sde_core.hpp"
#include "ppmb/types.hpp"

namespace ppmb {

/// Changed-variable point (eps_1, eta_1, ..., eps_N, eta_N, rho21, rho12, nu).
class PhysState {
 public:
  explicit PhysState(int modes) : data_(CVector::Zero(2 * modes + 3)) {}
  explicit PhysState(CVector data);

  int mode_count() const { return static_cast<int>((data_.size() - 3) / 2); }

  Complex& epsilon(int n) { return data_[2 * n]; }
  Complex& eta(int n) { return data_[2 * n + 1]; }
  Complex& rho21() { return data_[data_.size() - 3]; }
  Complex& rho12() { return data_[data_.size() - 2]; }
  Complex& nu() { return data_[data_.size() - 1]; }
  Complex epsilon(int n) const { return data_[2 * n]; }
  Complex eta(int n) const { return data_[2 * n + 1]; }
  Complex rho21() const { return data_[data_.size() - 3]; }
  Complex rho12() const { return data_[data_.size() - 2]; }
  Complex nu() const { return data_[data_.size() - 1]; }

  const CVector& vector() const { return data_; }

 private:
  CVector data_;
};

PhysState to_physical(const BasisFamily& family, const PhaseState& state);

/// Inverse change of variables. Requires 4 rho21 rho12 = (1 + nu)(1 - nu)
/// within `tol` relative; throws DomainError otherwise and PoleError at nu = 1.
PhaseState from_physical(const BasisFamily& family, const PhysState& phys, double tol = 1e-9);

void drift_bar_into(const ModelParams& params, const CVector& psi, CVector& out);
CVector drift_bar(const ModelParams& params, const PhysState& phys);

/// Changed-variable noise for coherent-spin states, (2N+3) x (4N+2). The
/// square roots that appear twice with different radicands share one sign, so
/// the product with its transpose is the transformed diffusion matrix.
void noise_bar_into(const ModelParams& params, const CVector& psi, CMatrix& out);
CMatrix noise_bar(const ModelParams& params, const PhysState& phys);

struct FieldSample {
  Complex E;
  Complex H;
};

/// E(x) = sum e_p(w_n) eps_n sin(k_n x), H(x) = -(1/Z) sum e_p(w_n) eta_n cos(k_n x).
FieldSample reconstruct_fields(const ModelParams& params, const PhysState& phys, double x);

/// sum_n i g_n eps_n sin(k_n x0), the field term of the stochastic Bloch rows.
Complex mode_drive(const ModelParams& params, const PhysState& phys);

/// -(i/hbar) m21 E(x0). Equals mode_drive when g_n is proportional to e_p(w_n).
Complex dipole_drive(const ModelParams& params, const PhysState& phys);

/// Changed-variable SDE (drift_bar, noise_bar). Only the coherent-spin family
/// has a noise matrix; other families throw DomainError.
SdeSystem make_changed_var_system(const ModelParams& params, const BasisFamily& family);

}  // namespace ppmb
