#include "ppmb/mb_semiclassical.hpp"

#include <cmath>
#include <limits>

#include "ppmb/errors.hpp"

namespace ppmb {

MbState MbState::zero(int modes) {
  MbState s;
  s.epsilon.assign(modes, 0.0);
  s.eta.assign(modes, 0.0);
  return s;
}

MbState MbState::from_phys(const PhysState& phys, double tol) {
  const int N = phys.mode_count();
  MbState s = zero(N);
  auto real_part = [tol](Complex x, const char* what) {
    if (std::abs(x.imag()) > tol * std::max(1.0, std::abs(x))) {
      throw DomainError(std::string(what) + " is not real on the Hermitian slice");
    }
    return x.real();
  };
  for (int n = 0; n < N; ++n) {
    s.epsilon[n] = real_part(phys.epsilon(n), "epsilon");
    s.eta[n] = real_part(phys.eta(n), "eta");
  }
  if (std::abs(phys.rho12() - std::conj(phys.rho21())) > tol * std::max(1.0, std::abs(phys.rho21()))) {
    throw DomainError("rho12 is not the conjugate of rho21");
  }
  s.rho21 = phys.rho21();
  s.nu = real_part(phys.nu(), "nu");
  return s;
}

PhysState MbState::to_phys() const {
  PhysState p(mode_count());
  for (int n = 0; n < mode_count(); ++n) {
    p.epsilon(n) = epsilon[n];
    p.eta(n) = eta[n];
  }
  p.rho21() = rho21;
  p.rho12() = std::conj(rho21);
  p.nu() = nu;
  return p;
}

double MbState::bloch_excess() const { return std::norm(rho21) - 0.25 * (1.0 - nu * nu); }

MbState mb_rhs(const ModelParams& params, const MbState& s) {
  const int N = params.mode_count();
  if (s.mode_count() != N) throw DomainError("MB state does not match the mode count");
  MbState d = MbState::zero(N);
  double drive = 0.0;
  for (int n = 0; n < N; ++n) {
    d.epsilon[n] = params.omega(n) * s.eta[n];
    d.eta[n] = -params.omega(n) * s.epsilon[n] - 4.0 * params.gs(n) * s.rho21.real();
    drive += params.gs(n) * s.epsilon[n];
  }
  const DissipationRates& r = params.rates();
  d.rho21 = -kI * params.Omega() * s.rho21 + kI * drive * s.nu - r.gamma2() * s.rho21;
  d.nu = -4.0 * drive * s.rho21.imag() - r.gamma1() * (s.nu - r.nu0());
  return d;
}

namespace {

MbState axpy(const MbState& x, double a, const MbState& k) {
  MbState y = x;
  for (std::size_t n = 0; n < y.epsilon.size(); ++n) {
    y.epsilon[n] += a * k.epsilon[n];
    y.eta[n] += a * k.eta[n];
  }
  y.rho21 += a * k.rho21;
  y.nu += a * k.nu;
  return y;
}

ObservableSet observe(const MbState& s) {
  ObservableSet o;
  o.rho21 = s.rho21;
  o.rho12 = std::conj(s.rho21);
  o.nu = s.nu;
  o.e.assign(s.epsilon.begin(), s.epsilon.end());
  o.h.assign(s.eta.begin(), s.eta.end());
  return o;
}

}  // namespace

MbTrajectory evolve_mb(const ModelParams& params, const MbState& state0, const TimeGrid& grid) {
  grid.validate();
  MbTrajectory traj;
  traj.grid = grid;
  traj.points.reserve(grid.points());
  traj.max_bloch_excess = -std::numeric_limits<double>::infinity();
  auto record = [&traj](const MbState& s) {
    const double excess = s.bloch_excess();
    traj.max_bloch_excess = std::max(traj.max_bloch_excess, excess);
    if (excess > kBlochTolerance) ++traj.bloch_violations;
    traj.points.push_back(observe(s));
  };
  MbState s = state0;
  const double dt = grid.dt();
  record(s);
  for (std::size_t i = 1; i <= grid.steps; ++i) {
    const MbState k1 = mb_rhs(params, s);
    const MbState k2 = mb_rhs(params, axpy(s, 0.5 * dt, k1));
    const MbState k3 = mb_rhs(params, axpy(s, 0.5 * dt, k2));
    const MbState k4 = mb_rhs(params, axpy(s, dt, k3));
    s = axpy(s, dt / 6.0, k1);
    s = axpy(s, dt / 3.0, k2);
    s = axpy(s, dt / 3.0, k3);
    s = axpy(s, dt / 6.0, k4);
    record(s);
  }
  traj.final_state = std::move(s);
  return traj;
}

}  // namespace ppmb
