#include "ppmb/changed_vars.hpp"

#include <cmath>
#include <numbers>

#include "ppmb/errors.hpp"
#include "ppmb/observables.hpp"

namespace ppmb {

PhysState::PhysState(CVector data) : data_(std::move(data)) {
  if (data_.size() < 5 || data_.size() % 2 == 0) {
    throw DomainError("physical state needs length 2N+3 with N >= 1");
  }
}

PhysState to_physical(const BasisFamily& family, const PhaseState& state) {
  const ObservableSet o = project(family, state);
  const int N = state.mode_count();
  PhysState out(N);
  for (int n = 0; n < N; ++n) {
    out.epsilon(n) = o.e[n];
    out.eta(n) = o.h[n];
  }
  out.rho21() = o.rho21;
  out.rho12() = o.rho12;
  out.nu() = o.nu;
  return out;
}

PhaseState from_physical(const BasisFamily& family, const PhysState& phys, double tol) {
  const Complex one_minus = 1.0 - phys.nu();
  if (std::abs(one_minus) < kPoleFloor) throw PoleError("nu = 1 has no phase-space preimage");
  const Complex lhs = 4.0 * phys.rho21() * phys.rho12();
  const Complex rhs = (1.0 + phys.nu()) * one_minus;
  if (std::abs(lhs - rhs) > tol * std::max({1.0, std::abs(lhs), std::abs(rhs)})) {
    throw DomainError("inconsistent fermionic variables: 4 rho21 rho12 != (1 + nu)(1 - nu)");
  }
  const int N = phys.mode_count();
  PhaseState out(N);
  for (int n = 0; n < N; ++n) {
    out.alpha(n) = 0.5 * (phys.epsilon(n) + kI * phys.eta(n));
    out.beta(n) = 0.5 * (phys.epsilon(n) - kI * phys.eta(n));
  }
  out.z() = family.invert(2.0 * phys.rho21() / one_minus);
  out.w() = family.conjugated().invert(2.0 * phys.rho12() / one_minus);
  return out;
}

void drift_bar_into(const ModelParams& params, const CVector& psi, CVector& out) {
  const int N = params.mode_count();
  if (psi.size() != 2 * N + 3) throw DomainError("physical state length does not match modes");
  const Complex r21 = psi[2 * N];
  const Complex r12 = psi[2 * N + 1];
  const Complex nu = psi[2 * N + 2];
  Complex drive{0.0, 0.0};
  for (int n = 0; n < N; ++n) {
    const double gs = params.gs(n);
    const double wn = params.omega(n);
    out[2 * n] = wn * psi[2 * n + 1];
    out[2 * n + 1] = -wn * psi[2 * n] - 2.0 * gs * (r21 + r12);
    drive += gs * psi[2 * n];
  }
  const DissipationRates& r = params.rates();
  const double Om = params.Omega();
  out[2 * N] = -kI * Om * r21 + kI * drive * nu - r.gamma2() * r21;
  out[2 * N + 1] = kI * Om * r12 - kI * drive * nu - r.gamma2() * r12;
  out[2 * N + 2] = 2.0 * kI * drive * (r21 - r12) - r.gamma1() * (nu - r.nu0());
}

CVector drift_bar(const ModelParams& params, const PhysState& phys) {
  CVector out(phys.vector().size());
  drift_bar_into(params, phys.vector(), out);
  return out;
}

namespace {

const Complex kSqrtI = std::polar(1.0, std::numbers::pi / 4.0);

// Root of `radicand` with the sign of `reference`; principal when the
// reference vanishes.
Complex aligned_sqrt(Complex radicand, Complex reference) {
  const Complex s = std::sqrt(radicand);
  return (s * std::conj(reference)).real() < 0.0 ? -s : s;
}

}  // namespace

void noise_bar_into(const ModelParams& params, const CVector& psi, CMatrix& out) {
  const int N = params.mode_count();
  if (psi.size() != 2 * N + 3) throw DomainError("physical state length does not match modes");
  const Complex r21 = psi[2 * N];
  const Complex r12 = psi[2 * N + 1];
  const Complex nu = psi[2 * N + 2];
  const Complex om = 1.0 - nu;
  if (std::abs(om) < kPoleFloor) throw PoleError("nu = 1 in changed-variable noise");
  const Complex om2 = om * om;
  const Complex quarter = om2 / 4.0;

  const Complex p = std::sqrt(4.0 * r21 * r21 / om2 - 1.0);
  const Complex q = std::sqrt(4.0 * r12 * r12 / om2 - 1.0);
  const Complex op2 = (1.0 + nu) * (1.0 + nu);
  // sqrt((1+nu)^2/(4 rho^2) - 1) equals +-p (resp. +-q) on consistent states.
  const Complex pr = r12 == Complex(0.0, 0.0) ? p : aligned_sqrt(op2 / (4.0 * r12 * r12) - 1.0, p);
  const Complex qr = r21 == Complex(0.0, 0.0) ? q : aligned_sqrt(op2 / (4.0 * r21 * r21) - 1.0, q);

  const Complex rk[3] = {quarter * p, -r12 * r12 * pr, r12 * om * pr};
  const Complex sk[3] = {-r21 * r21 * qr, quarter * q, r21 * om * qr};

  out.setZero(2 * N + 3, 4 * N + 2);
  for (int n = 0; n < N; ++n) {
    const Complex pre = kSqrtI * std::sqrt(Complex(params.gs(n) / 2.0));
    const int c = 4 * n;
    out(2 * n, c) = pre * kI * p;
    out(2 * n, c + 1) = -pre * p;
    out(2 * n + 1, c) = pre * p;
    out(2 * n + 1, c + 1) = pre * kI * p;
    out(2 * n, c + 2) = -pre * kI * q;
    out(2 * n, c + 3) = -pre * q;
    out(2 * n + 1, c + 2) = pre * q;
    out(2 * n + 1, c + 3) = -pre * kI * q;
    for (int k = 0; k < 3; ++k) {
      out(2 * N + k, c) = -pre * kI * rk[k];
      out(2 * N + k, c + 1) = -pre * rk[k];
      out(2 * N + k, c + 2) = -pre * kI * sk[k];
      out(2 * N + k, c + 3) = pre * sk[k];
    }
  }

  const DissipationRates& r = params.rates();
  if (r.any()) {
    const Complex ratio = (1.0 + nu) / om;
    const Complex t = std::sqrt((2.0 * r.rp * ratio + r.r21 * ratio * ratio + r.r12) / 2.0);
    const int c = 4 * N;
    out(2 * N, c) = -t * kI * (r21 * r21 + quarter);
    out(2 * N, c + 1) = t * (-r21 * r21 + quarter);
    out(2 * N + 1, c) = t * kI * (r12 * r12 + quarter);
    out(2 * N + 1, c + 1) = t * (-r12 * r12 + quarter);
    out(2 * N + 2, c) = t * kI * (r21 - r12) * om;
    out(2 * N + 2, c + 1) = t * (r12 + r21) * om;
  }
}

CMatrix noise_bar(const ModelParams& params, const PhysState& phys) {
  CMatrix out;
  noise_bar_into(params, phys.vector(), out);
  return out;
}

FieldSample reconstruct_fields(const ModelParams& params, const PhysState& phys, double x) {
  FieldSample f{0.0, 0.0};
  for (int n = 0; n < params.mode_count(); ++n) {
    const double ep = params.field_per_photon(n);
    const double kx = params.wave_number(n) * x;
    f.E += ep * phys.epsilon(n) * std::sin(kx);
    f.H += ep * phys.eta(n) * std::cos(kx);
  }
  f.H *= -1.0 / params.impedance();
  return f;
}

Complex mode_drive(const ModelParams& params, const PhysState& phys) {
  Complex s{0.0, 0.0};
  for (int n = 0; n < params.mode_count(); ++n) s += params.gs(n) * phys.epsilon(n);
  return kI * s;
}

Complex dipole_drive(const ModelParams& params, const PhysState& phys) {
  const Complex E = reconstruct_fields(params, phys, params.x0()).E;
  return -kI / params.hbar() * params.dipole_moment(0) * E;
}

SdeSystem make_changed_var_system(const ModelParams& params, const BasisFamily& family) {
  if (family.kind() != FamilyKind::CoherentSpin) {
    throw DomainError("changed-variable noise is only available for coherent-spin states");
  }
  const int N = params.mode_count();
  SdeSystem sys;
  sys.state_dim = 2 * N + 3;
  sys.noise_dim = 4 * N + 2;
  sys.drift = [params](const CVector& x, CVector& out) { drift_bar_into(params, x, out); };
  sys.noise = [params](const CVector& x, CMatrix& out) { noise_bar_into(params, x, out); };
  return sys;
}

}  // namespace ppmb
