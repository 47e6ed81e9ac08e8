#pragma once

#include <optional>
#include <vector>

namespace ppmb {

struct DissipationRates {
  double r12 = 0.0;  // down -> up scattering
  double r21 = 0.0;  // up -> down scattering
  double rp = 0.0;   // pure dephasing

  double gamma1() const { return r12 + r21; }
  double gamma2() const { return 0.5 * (r12 + r21) + rp; }
  /// Steady-state inversion; 0 when gamma1 vanishes.
  double nu0() const { return gamma1() > 0.0 ? (r12 - r21) / (r12 + r21) : 0.0; }
  bool any() const { return r12 != 0.0 || r21 != 0.0 || rp != 0.0; }

  bool operator==(const DissipationRates&) const = default;
};

/// User-facing description of the cavity, atom and couplings. Missing values
/// are derived by ModelParams.
struct ModelSpec {
  double hbar = 1.0;
  double eps0 = 1.0;
  double mu0 = 1.0;
  double Omega = 1.0;  // atomic transition angular frequency
  double length = 1.0;
  double area = 1.0;
  std::optional<double> x0;  // default: length / 2
  int modes = 1;
  std::vector<double> frequencies;  // empty: omega_n = pi c n / l
  std::vector<double> couplings;    // one value per mode, or one value for all
  std::optional<double> dipole;     // m21; sets g_n = -m21 e_p(omega_n) / hbar
  DissipationRates rates;

  bool operator==(const ModelSpec&) const = default;
};

/// Validated model with the derived per-mode quantities cached.
///
/// Mode functions are sin(k_n x) with k_n = n pi / l. When the frequencies are
/// derived from the geometry this equals omega_n / c; explicit frequencies
/// leave the mode shapes tied to the cavity length.
class ModelParams {
 public:
  explicit ModelParams(const ModelSpec& spec);

  const ModelSpec& spec() const { return spec_; }
  int mode_count() const { return static_cast<int>(omega_.size()); }

  double hbar() const { return spec_.hbar; }
  double Omega() const { return spec_.Omega; }
  double length() const { return spec_.length; }
  double x0() const { return x0_; }
  double volume() const { return spec_.length * spec_.area; }
  double c() const;
  double impedance() const;

  double omega(int n) const { return omega_[n]; }
  double wave_number(int n) const { return k_[n]; }
  double coupling(int n) const { return g_[n]; }
  /// sin(k_n x0).
  double position_factor(int n) const { return s_[n]; }
  /// g(omega_n) sin(k_n x0).
  double gs(int n) const { return gs_[n]; }

  /// e_p(omega_n) = sqrt(hbar omega_n / (eps0 V)).
  double field_per_photon(int n) const;
  /// m21 = -hbar g(omega_n) / e_p(omega_n), evaluated for mode n.
  double dipole_moment(int n = 0) const;
  /// True when every mode yields the same m21 within the relative tolerance.
  bool couplings_match_dipole(double rtol = 1e-9) const;

  const DissipationRates& rates() const { return spec_.rates; }

 private:
  ModelSpec spec_;
  double x0_;
  std::vector<double> omega_, k_, g_, s_, gs_;
};

}  // namespace ppmb
