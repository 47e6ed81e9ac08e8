#pragma once

#include "ppmb/basis_family.hpp"
#include "ppmb/model_params.hpp"
#include "ppmb/sde_core.hpp"
#include "ppmb/types.hpp"

namespace ppmb {

/// Positive-P phase-space point (alpha_1, beta_1, ..., alpha_N, beta_N, z, w).
class PhaseState {
 public:
  explicit PhaseState(int modes) : data_(CVector::Zero(2 * modes + 2)) {}
  explicit PhaseState(CVector data);

  int mode_count() const { return static_cast<int>(data_.size() / 2) - 1; }

  Complex& alpha(int n) { return data_[2 * n]; }
  Complex& beta(int n) { return data_[2 * n + 1]; }
  Complex& z() { return data_[data_.size() - 2]; }
  Complex& w() { return data_[data_.size() - 1]; }
  Complex alpha(int n) const { return data_[2 * n]; }
  Complex beta(int n) const { return data_[2 * n + 1]; }
  Complex z() const { return data_[data_.size() - 2]; }
  Complex w() const { return data_[data_.size() - 1]; }

  const CVector& vector() const { return data_; }

 private:
  CVector data_;
};

/// Number of noise columns: 4 per mode, plus 2 for the dissipative block.
inline int jc_noise_dim(int modes, bool dissipative) { return 4 * modes + (dissipative ? 2 : 0); }

// Kernels on flat vectors; `phi` uses the PhaseState ordering. Each throws
// PoleError near h' = 0, htilde' = 0 or 1 + h htilde = 0.
void jc_drift_into(const ModelParams& params, const BasisFamily& family, bool dissipative,
                   const CVector& phi, CVector& out);
void jc_noise_into(const ModelParams& params, const BasisFamily& family, bool dissipative,
                   const CVector& phi, CMatrix& out);
void jc_diffusion_into(const ModelParams& params, const BasisFamily& family, bool dissipative,
                       const CVector& phi, CMatrix& out);

CVector drift_jc(const ModelParams& params, const BasisFamily& family, const PhaseState& state);
CMatrix diffusion_jc(const ModelParams& params, const BasisFamily& family,
                     const PhaseState& state);
CMatrix noise_jc(const ModelParams& params, const BasisFamily& family, const PhaseState& state);

CVector drift_jc_plus(const ModelParams& params, const BasisFamily& family,
                      const PhaseState& state);
CMatrix diffusion_jc_plus(const ModelParams& params, const BasisFamily& family,
                          const PhaseState& state);
CMatrix noise_jc_plus(const ModelParams& params, const BasisFamily& family,
                      const PhaseState& state);

/// Positive-P SDE of the Jaynes-Cummings system. The dissipative variant adds
/// the Lindblad terms and two noise columns.
SdeSystem make_jc_system(const ModelParams& params, const BasisFamily& family, bool dissipative);

}  // namespace ppmb
