#include "ppmb/jc_model.hpp"

#include <cmath>
#include <numbers>

#include "ppmb/errors.hpp"

namespace ppmb {

PhaseState::PhaseState(CVector data) : data_(std::move(data)) {
  if (data_.size() < 4 || data_.size() % 2 != 0) {
    throw DomainError("phase state needs length 2(N+1) with N >= 1");
  }
}

namespace {

const Complex kSqrtI = std::polar(1.0, std::numbers::pi / 4.0);

struct FermionicTerms {
  BasisPoint p;  // h at z
  BasisPoint q;  // htilde at w
  Complex prod;  // h htilde
  Complex den;   // 1 + h htilde
};

FermionicTerms fermionic_terms(const BasisFamily& family, Complex z, Complex w) {
  FermionicTerms t{family.at(z), family.tilde_at(w), 0.0, 0.0};
  if (std::abs(t.p.dh) < kPoleFloor || std::abs(t.q.dh) < kPoleFloor) {
    throw PoleError("basis derivative h' vanishes");
  }
  t.prod = t.p.h * t.q.h;
  t.den = 1.0 + t.prod;
  if (std::abs(t.den) < kPoleFloor) throw PoleError("1 + h htilde vanishes");
  return t;
}

void check_dims(const ModelParams& params, const CVector& phi) {
  if (phi.size() != 2 * params.mode_count() + 2) {
    throw DomainError("phase state length does not match the mode count");
  }
}

// Entry d(phi) of the dissipative diffusion block.
Complex dissipative_entry(const DissipationRates& r, const FermionicTerms& t) {
  const Complex inv = t.p.inv_dh * t.q.inv_dh;
  return r.rp * 2.0 * t.prod * inv + r.r21 * t.prod * t.prod * inv + r.r12 * inv;
}

}  // namespace

void jc_drift_into(const ModelParams& params, const BasisFamily& family, bool dissipative,
                   const CVector& phi, CVector& out) {
  check_dims(params, phi);
  const int N = params.mode_count();
  const Complex z = phi[2 * N];
  const Complex w = phi[2 * N + 1];
  const FermionicTerms t = fermionic_terms(family, z, w);
  const Complex field = (t.p.h + t.q.h) / t.den;

  Complex drive{0.0, 0.0};
  for (int n = 0; n < N; ++n) {
    const double gs = params.gs(n);
    const double wn = params.omega(n);
    const Complex a = phi[2 * n];
    const Complex b = phi[2 * n + 1];
    out[2 * n] = kI * (-wn * a - gs * field);
    out[2 * n + 1] = kI * (wn * b + gs * field);
    drive += gs * (a + b);
  }
  const double Om = params.Omega();
  out[2 * N] = kI * (-Om * t.p.h_over_dh + drive * t.p.sq_over_dh);
  out[2 * N + 1] = kI * (Om * t.q.h_over_dh - drive * t.q.sq_over_dh);

  if (dissipative) {
    const DissipationRates& r = params.rates();
    auto relax = [&](const Complex& h_over_dh) {
      return -r.rp * h_over_dh * (1.0 - t.prod) / t.den -
             r.r21 * h_over_dh * (1.0 + 3.0 * t.prod) / (2.0 * t.den) +
             r.r12 * h_over_dh * (3.0 + t.prod) / (2.0 * t.den);
    };
    out[2 * N] += relax(t.p.h_over_dh);
    out[2 * N + 1] += relax(t.q.h_over_dh);
  }
}

void jc_diffusion_into(const ModelParams& params, const BasisFamily& family, bool dissipative,
                       const CVector& phi, CMatrix& out) {
  check_dims(params, phi);
  const int N = params.mode_count();
  const FermionicTerms t = fermionic_terms(family, phi[2 * N], phi[2 * N + 1]);
  out.setZero(2 * N + 2, 2 * N + 2);
  for (int n = 0; n < N; ++n) {
    const Complex d = params.gs(n) * t.p.sq_over_dh;
    const Complex dt = params.gs(n) * t.q.sq_over_dh;
    out(2 * n, 2 * N) = out(2 * N, 2 * n) = kI * d;
    out(2 * n + 1, 2 * N + 1) = out(2 * N + 1, 2 * n + 1) = -kI * dt;
  }
  if (dissipative) {
    out(2 * N, 2 * N + 1) = out(2 * N + 1, 2 * N) = dissipative_entry(params.rates(), t);
  }
}

void jc_noise_into(const ModelParams& params, const BasisFamily& family, bool dissipative,
                   const CVector& phi, CMatrix& out) {
  check_dims(params, phi);
  const int N = params.mode_count();
  const FermionicTerms t = fermionic_terms(family, phi[2 * N], phi[2 * N + 1]);
  out.setZero(2 * N + 2, jc_noise_dim(N, dissipative));
  const int zr = 2 * N;
  const int wr = 2 * N + 1;
  for (int n = 0; n < N; ++n) {
    const Complex a = kSqrtI * std::sqrt(params.gs(n) * t.p.sq_over_dh / 2.0);
    const Complex b = kSqrtI * std::sqrt(params.gs(n) * t.q.sq_over_dh / 2.0);
    const int c = 4 * n;
    // P_n and R_n share columns c, c+1; Q_n and S_n share c+2, c+3.
    out(2 * n, c) = kI * a;
    out(2 * n, c + 1) = -a;
    out(zr, c) = -kI * a;
    out(zr, c + 1) = -a;
    out(2 * n + 1, c + 2) = -kI * b;
    out(2 * n + 1, c + 3) = -b;
    out(wr, c + 2) = -kI * b;
    out(wr, c + 3) = b;
  }
  if (dissipative) {
    const Complex s = std::sqrt(dissipative_entry(params.rates(), t) / 2.0);
    const int c = 4 * N;
    out(zr, c) = -kI * s;
    out(zr, c + 1) = s;
    out(wr, c) = kI * s;
    out(wr, c + 1) = s;
  }
}

CVector drift_jc(const ModelParams& params, const BasisFamily& family, const PhaseState& state) {
  CVector out(state.vector().size());
  jc_drift_into(params, family, false, state.vector(), out);
  return out;
}

CMatrix diffusion_jc(const ModelParams& params, const BasisFamily& family,
                     const PhaseState& state) {
  CMatrix out;
  jc_diffusion_into(params, family, false, state.vector(), out);
  return out;
}

CMatrix noise_jc(const ModelParams& params, const BasisFamily& family, const PhaseState& state) {
  CMatrix out;
  jc_noise_into(params, family, false, state.vector(), out);
  return out;
}

CVector drift_jc_plus(const ModelParams& params, const BasisFamily& family,
                      const PhaseState& state) {
  CVector out(state.vector().size());
  jc_drift_into(params, family, true, state.vector(), out);
  return out;
}

CMatrix diffusion_jc_plus(const ModelParams& params, const BasisFamily& family,
                          const PhaseState& state) {
  CMatrix out;
  jc_diffusion_into(params, family, true, state.vector(), out);
  return out;
}

CMatrix noise_jc_plus(const ModelParams& params, const BasisFamily& family,
                      const PhaseState& state) {
  CMatrix out;
  jc_noise_into(params, family, true, state.vector(), out);
  return out;
}

SdeSystem make_jc_system(const ModelParams& params, const BasisFamily& family, bool dissipative) {
  const int N = params.mode_count();
  SdeSystem sys;
  sys.state_dim = 2 * N + 2;
  sys.noise_dim = jc_noise_dim(N, dissipative);
  sys.drift = [params, family, dissipative](const CVector& x, CVector& out) {
    jc_drift_into(params, family, dissipative, x, out);
  };
  sys.noise = [params, family, dissipative](const CVector& x, CMatrix& out) {
    jc_noise_into(params, family, dissipative, x, out);
  };
  return sys;
}

}  // namespace ppmb
