#include "ppmb/model_params.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ppmb/errors.hpp"

namespace ppmb {

ModelParams::ModelParams(const ModelSpec& spec) : spec_(spec) {
  if (spec.modes < 1) throw DomainError("model needs at least one cavity mode");
  if (!(spec.hbar > 0.0) || !(spec.eps0 > 0.0) || !(spec.mu0 > 0.0)) {
    throw DomainError("hbar, eps0 and mu0 must be positive");
  }
  if (!(spec.length > 0.0) || !(spec.area > 0.0)) {
    throw DomainError("cavity length and area must be positive");
  }
  x0_ = spec.x0.value_or(0.5 * spec.length);
  if (!(x0_ > 0.0 && x0_ < spec.length)) {
    throw DomainError("atom position x0 must lie inside (0, l)");
  }
  const auto& r = spec.rates;
  if (r.r12 < 0.0 || r.r21 < 0.0 || r.rp < 0.0) throw DomainError("rates must be non-negative");

  const int N = spec.modes;
  const double pi = std::numbers::pi;
  if (!spec.frequencies.empty() && static_cast<int>(spec.frequencies.size()) != N) {
    throw DomainError("expected " + std::to_string(N) + " mode frequencies");
  }
  for (int n = 0; n < N; ++n) {
    omega_.push_back(spec.frequencies.empty() ? pi * c() * (n + 1) / spec.length
                                              : spec.frequencies[n]);
    k_.push_back(pi * (n + 1) / spec.length);
    if (n > 0 && !(omega_[n] > omega_[n - 1])) {
      throw DomainError("mode frequencies must be strictly increasing");
    }
  }
  if (!(omega_[0] > 0.0)) throw DomainError("mode frequencies must be positive");

  if (spec.dipole) {
    if (!spec.couplings.empty()) throw DomainError("give either couplings or dipole, not both");
    for (int n = 0; n < N; ++n) g_.push_back(-*spec.dipole * field_per_photon(n) / spec.hbar);
  } else if (spec.couplings.size() == 1) {
    g_.assign(N, spec.couplings[0]);
  } else if (static_cast<int>(spec.couplings.size()) == N) {
    g_ = spec.couplings;
  } else if (spec.couplings.empty()) {
    g_.assign(N, 0.0);
  } else {
    throw DomainError("expected 1 or " + std::to_string(N) + " coupling constants");
  }
  for (int n = 0; n < N; ++n) {
    s_.push_back(std::sin(k_[n] * x0_));
    gs_.push_back(g_[n] * s_[n]);
  }
}

double ModelParams::c() const { return 1.0 / std::sqrt(spec_.mu0 * spec_.eps0); }

double ModelParams::impedance() const { return std::sqrt(spec_.mu0 / spec_.eps0); }

double ModelParams::field_per_photon(int n) const {
  const double w = spec_.frequencies.empty()
                       ? std::numbers::pi * c() * (n + 1) / spec_.length
                       : spec_.frequencies[n];
  return std::sqrt(spec_.hbar * w / (spec_.eps0 * volume()));
}

double ModelParams::dipole_moment(int n) const {
  return -spec_.hbar * g_[n] / field_per_photon(n);
}

bool ModelParams::couplings_match_dipole(double rtol) const {
  const double m = dipole_moment(0);
  for (int n = 1; n < mode_count(); ++n) {
    if (std::abs(dipole_moment(n) - m) > rtol * std::max(std::abs(m), 1e-300)) return false;
  }
  return true;
}

}  // namespace ppmb
