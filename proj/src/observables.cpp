#include "ppmb/observables.hpp"

#include <charconv>

#include "ppmb/errors.hpp"

namespace ppmb {

namespace {

Complex checked_denominator(Complex h, Complex ht) {
  const Complex den = 1.0 + h * ht;
  if (std::abs(den) < kPoleFloor) throw PoleError("1 + h htilde vanishes");
  return den;
}

struct Local {
  Complex h, dh, d2h;  // h and derivatives at z
  Complex H, dH, d2H;  // htilde and derivatives at w
  Complex D;
};

Local local_terms(const BasisFamily& family, const BasisFamily& tilde, Complex z, Complex w) {
  const BasisPoint p = family.at(z);
  const BasisPoint q = tilde.at(w);
  return {p.h, p.dh, family.second_derivative(z), q.h, q.dh, tilde.second_derivative(w),
          checked_denominator(p.h, q.h)};
}

int parse_mode_suffix(const std::string& name, int modes) {
  int n = 0;
  const char* first = name.data() + 2;
  const char* last = name.data() + name.size();
  auto [ptr, ec] = std::from_chars(first, last, n);
  if (ec != std::errc{} || ptr != last || n < 1 || n > modes) {
    throw ConfigError("unknown observable '" + name + "'");
  }
  return n - 1;
}

}  // namespace

ObservableSet project(const BasisFamily& family, const PhaseState& state) {
  const BasisEval e = eval(family, state.z(), state.w());
  const Complex den = checked_denominator(e.h, e.htilde);
  ObservableSet out;
  out.rho21 = e.h / den;
  out.rho12 = e.htilde / den;
  out.nu = (e.h * e.htilde - 1.0) / den;
  const int N = state.mode_count();
  out.e.resize(N);
  out.h.resize(N);
  for (int n = 0; n < N; ++n) {
    out.e[n] = state.beta(n) + state.alpha(n);
    out.h[n] = kI * (state.beta(n) - state.alpha(n));
  }
  return out;
}

SdeSystem extend_with_observable(const SdeSystem& system, const ScalarObservable& v) {
  const int n = system.state_dim;
  const int m = system.noise_dim;
  SdeSystem out;
  out.state_dim = n + 1;
  out.noise_dim = m;
  out.drift = [system, v, n, m](const CVector& x, CVector& a) {
    thread_local CVector inner, da, grad;
    thread_local CMatrix B, hess;
    inner = x.head(n);
    da.resize(n);
    B.resize(n, m);
    grad.resize(n);
    hess.resize(n, n);
    system.drift(inner, da);
    system.noise(inner, B);
    v.gradient(inner, grad);
    v.hessian(inner, hess);
    Complex first{0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      a[i] = da[i];
      first += da[i] * grad[i];
    }
    Complex second{0.0, 0.0};
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        if (hess(p, q) == Complex(0.0, 0.0)) continue;
        Complex bb{0.0, 0.0};
        for (int j = 0; j < m; ++j) bb += B(p, j) * B(q, j);
        second += bb * hess(p, q);
      }
    }
    a[n] = first + 0.5 * second;
  };
  out.noise = [system, v, n, m](const CVector& x, CMatrix& b) {
    thread_local CVector inner, grad;
    thread_local CMatrix B;
    inner = x.head(n);
    B.resize(n, m);
    grad.resize(n);
    system.noise(inner, B);
    v.gradient(inner, grad);
    b.topRows(n) = B;
    for (int j = 0; j < m; ++j) {
      Complex s{0.0, 0.0};
      for (int i = 0; i < n; ++i) s += B(i, j) * grad[i];
      b(n, j) = s;
    }
  };
  return out;
}

ScalarObservable coordinate_observable(int index, int dim) {
  if (index < 0 || index >= dim) throw DomainError("coordinate index out of range");
  ScalarObservable v;
  v.name = "x" + std::to_string(index);
  v.value = [index](const CVector& x) { return x[index]; };
  v.gradient = [index, dim](const CVector&, CVector& g) {
    g.setZero(dim);
    g[index] = 1.0;
  };
  v.hessian = [dim](const CVector&, CMatrix& hm) { hm.setZero(dim, dim); };
  return v;
}

ScalarObservable fermionic_observable(const BasisFamily& family, FermionicQuantity quantity,
                                      int modes) {
  const int dim = 2 * modes + 2;
  const int iz = 2 * modes;
  const int iw = iz + 1;
  const BasisFamily tilde = family.conjugated();
  ScalarObservable v;
  switch (quantity) {
    case FermionicQuantity::Rho21: v.name = "rho_21"; break;
    case FermionicQuantity::Rho12: v.name = "rho_12"; break;
    case FermionicQuantity::Nu: v.name = "nu"; break;
  }
  v.value = [family, tilde, quantity, iz, iw](const CVector& x) {
    const Local t = local_terms(family, tilde, x[iz], x[iw]);
    switch (quantity) {
      case FermionicQuantity::Rho21: return t.h / t.D;
      case FermionicQuantity::Rho12: return t.H / t.D;
      case FermionicQuantity::Nu: break;
    }
    return (t.h * t.H - 1.0) / t.D;
  };
  v.gradient = [family, tilde, quantity, dim, iz, iw](const CVector& x, CVector& g) {
    const Local t = local_terms(family, tilde, x[iz], x[iw]);
    const Complex D2 = t.D * t.D;
    g.setZero(dim);
    switch (quantity) {
      case FermionicQuantity::Rho21:
        g[iz] = t.dh / D2;
        g[iw] = -t.h * t.h * t.dH / D2;
        break;
      case FermionicQuantity::Rho12:
        g[iz] = -t.H * t.H * t.dh / D2;
        g[iw] = t.dH / D2;
        break;
      case FermionicQuantity::Nu:
        g[iz] = 2.0 * t.dh * t.H / D2;
        g[iw] = 2.0 * t.h * t.dH / D2;
        break;
    }
  };
  v.hessian = [family, tilde, quantity, dim, iz, iw](const CVector& x, CMatrix& hm) {
    const Local t = local_terms(family, tilde, x[iz], x[iw]);
    const Complex D2 = t.D * t.D;
    const Complex D3 = D2 * t.D;
    Complex zz, zw, ww;
    switch (quantity) {
      case FermionicQuantity::Rho21:
        zz = t.d2h / D2 - 2.0 * t.dh * t.dh * t.H / D3;
        zw = -2.0 * t.h * t.dh * t.dH / D3;
        ww = -t.h * t.h * t.d2H / D2 + 2.0 * t.h * t.h * t.h * t.dH * t.dH / D3;
        break;
      case FermionicQuantity::Rho12:
        zz = -t.H * t.H * t.d2h / D2 + 2.0 * t.H * t.H * t.H * t.dh * t.dh / D3;
        zw = -2.0 * t.H * t.dH * t.dh / D3;
        ww = t.d2H / D2 - 2.0 * t.dH * t.dH * t.h / D3;
        break;
      case FermionicQuantity::Nu:
        zz = 2.0 * t.d2h * t.H / D2 - 4.0 * t.dh * t.dh * t.H * t.H / D3;
        zw = 2.0 * t.dh * t.dH * (1.0 - t.h * t.H) / D3;
        ww = 2.0 * t.h * t.d2H / D2 - 4.0 * t.h * t.h * t.dH * t.dH / D3;
        break;
    }
    hm.setZero(dim, dim);
    hm(iz, iz) = zz;
    hm(iz, iw) = hm(iw, iz) = zw;
    hm(iw, iw) = ww;
  };
  return v;
}

NamedObservable phase_space_observable(const BasisFamily& family, int modes,
                                       const std::string& name) {
  const int iz = 2 * modes;
  const int iw = iz + 1;
  auto fermionic = [family, iz, iw](const CVector& x) {
    const BasisEval e = eval(family, x[iz], x[iw]);
    return std::pair{e, checked_denominator(e.h, e.htilde)};
  };
  if (name == "rho_11" || name == "rho_22" || name == "nu") {
    const double sign = name == "rho_11" ? -1.0 : 1.0;
    const bool half = name != "nu";
    return {name, [fermionic, sign, half](const CVector& x) {
              const auto [e, den] = fermionic(x);
              const Complex nu = (e.h * e.htilde - 1.0) / den;
              return half ? 0.5 * (1.0 + sign * nu) : nu;
            }};
  }
  if (name == "rho_21") {
    return {name, [fermionic](const CVector& x) {
              const auto [e, den] = fermionic(x);
              return e.h / den;
            }};
  }
  if (name == "rho_12") {
    return {name, [fermionic](const CVector& x) {
              const auto [e, den] = fermionic(x);
              return e.htilde / den;
            }};
  }
  if (name == "z") return {name, [iz](const CVector& x) { return x[iz]; }};
  if (name == "w") return {name, [iw](const CVector& x) { return x[iw]; }};
  if (name.size() > 2 && (name.starts_with("e_") || name.starts_with("h_"))) {
    const int n = parse_mode_suffix(name, modes);
    if (name[0] == 'e') {
      return {name, [n](const CVector& x) { return x[2 * n + 1] + x[2 * n]; }};
    }
    return {name, [n](const CVector& x) { return kI * (x[2 * n + 1] - x[2 * n]); }};
  }
  throw ConfigError("unknown observable '" + name + "'");
}

}  // namespace ppmb
