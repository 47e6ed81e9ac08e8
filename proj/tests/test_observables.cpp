#include <random>

#include "doctest.h"
#include "ppmb/errors.hpp"
#include "ppmb/fermionic_init.hpp"
#include "ppmb/jc_model.hpp"
#include "ppmb/observables.hpp"
#include "support/oracles.hpp"

using namespace ppmb;

namespace {

SdeSystem ou(double theta, double sigma) {
  SdeSystem s;
  s.state_dim = 1;
  s.noise_dim = 1;
  s.drift = [theta](const CVector& x, CVector& a) { a[0] = -theta * x[0]; };
  s.noise = [sigma](const CVector&, CMatrix& b) { b(0, 0) = sigma; };
  return s;
}

ScalarObservable square() {
  ScalarObservable v;
  v.name = "x2";
  v.value = [](const CVector& x) { return x[0] * x[0]; };
  v.gradient = [](const CVector& x, CVector& g) {
    g.resize(1);
    g[0] = 2.0 * x[0];
  };
  v.hessian = [](const CVector&, CMatrix& h) {
    h.resize(1, 1);
    h(0, 0) = 2.0;
  };
  return v;
}

ModelParams cavity_like() {
  ModelSpec s;
  s.Omega = 1000;
  s.frequencies = {1100};
  s.couplings = {200};
  return ModelParams(s);
}

InitSampler thermal_sampler(const BasisFamily& f, Complex alpha) {
  const InitDistribution d = init_points(AtomicDensity::from_populations(1.0 / (1.0 + std::exp(-1.0)), 0.0), f);
  return [d, alpha](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto& p = d.points[d.pick(u(rng))];
    PhaseState s(1);
    s.alpha(0) = alpha;
    s.beta(0) = std::conj(alpha);
    s.z() = p.z;
    s.w() = p.w;
    return s.vector();
  };
}

}  // namespace

TEST_CASE("projection examples") {
  const BasisFamily cs = BasisFamily::coherent_spin();
  PhaseState s(1);
  ObservableSet o = project(cs, s);
  CHECK(o.rho21 == Complex(0.0));
  CHECK(o.rho12 == Complex(0.0));
  CHECK(o.nu == Complex(-1.0));
  CHECK(o.rho11() == Complex(1.0));
  s.z() = 1.0;
  s.w() = 1.0;
  s.alpha(0) = Complex(1.0, 2.0);
  s.beta(0) = Complex(3.0, -1.0);
  o = project(cs, s);
  CHECK(o.rho21 == Complex(0.5));
  CHECK(o.rho12 == Complex(0.5));
  CHECK(o.nu == Complex(0.0));
  CHECK(o.e[0] == Complex(4.0, 1.0));
  CHECK(std::abs(o.h[0] - kI * Complex(2.0, -3.0)) < 1e-15);
  s.w() = -1.0;
  CHECK_THROWS_AS(project(cs, s), PoleError);
}

TEST_CASE("projection matches the algebraic definitions") {
  std::mt19937_64 rng(1);
  const BasisFamily f = BasisFamily::additive_noise(Complex(4.0, 1.0), 0.3);
  for (int i = 0; i < 100; ++i) {
    const CVector x = oracle::random_complex(rng, 4, 1.0);
    const Complex h = oracle::additive_h(x[2], Complex(4.0, 1.0), 0.3);
    const Complex ht = std::conj(oracle::additive_h(std::conj(x[3]), Complex(4.0, 1.0), 0.3));
    const ObservableSet o = project(f, PhaseState(x));
    CHECK(std::abs(o.rho21 - h / (1.0 + h * ht)) < 1e-14);
    CHECK(std::abs(o.rho12 - ht / (1.0 + h * ht)) < 1e-14);
    CHECK(std::abs(o.nu - (h * ht - 1.0) / (1.0 + h * ht)) < 1e-14);
  }
}

TEST_CASE("analytic observable derivatives agree with finite differences") {
  std::mt19937_64 rng(2);
  for (const BasisFamily& f : {BasisFamily::coherent_spin(), BasisFamily::additive_noise(Complex(4.0, 0.5), 0.1)}) {
    for (auto q : {FermionicQuantity::Rho21, FermionicQuantity::Rho12, FermionicQuantity::Nu}) {
      const ScalarObservable v = fermionic_observable(f, q, 2);
      const std::function<oracle::Vec(const oracle::Vec&)> fn = [&v](const oracle::Vec& x) {
        oracle::Vec out(1);
        out[0] = v.value(x);
        return out;
      };
      for (int i = 0; i < 30; ++i) {
        const CVector x = oracle::random_complex(rng, 6, 0.7);
        CVector g;
        CMatrix H;
        v.gradient(x, g);
        v.hessian(x, H);
        const oracle::Mat J = oracle::fd_jacobian(fn, x);
        const oracle::Mat Hf = oracle::fd_hessian(fn, x, 0);
        const double scale = 1.0 + std::max(J.cwiseAbs().maxCoeff(), Hf.cwiseAbs().maxCoeff());
        CHECK((J.row(0).transpose() - g).cwiseAbs().maxCoeff() < 1e-7 * scale);
        CHECK((Hf - H).cwiseAbs().maxCoeff() < 1e-6 * scale);
      }
    }
  }
}

TEST_CASE("named observables") {
  const BasisFamily cs = BasisFamily::coherent_spin();
  CVector x(4);
  x << Complex(1, 1), Complex(2, 0), Complex(0.5, 0), Complex(0.5, 0);
  CHECK(std::abs(phase_space_observable(cs, 1, "rho_11").fn(x) - 0.5 * (1.0 - (0.25 - 1.0) / 1.25)) < 1e-15);
  CHECK(phase_space_observable(cs, 1, "e_1").fn(x) == Complex(3, 1));
  CHECK(std::abs(phase_space_observable(cs, 1, "h_1").fn(x) - kI * Complex(1, -1)) < 1e-15);
  CHECK(phase_space_observable(cs, 1, "z").fn(x) == Complex(0.5));
  CHECK_THROWS(phase_space_observable(cs, 1, "e_2"));
  CHECK_THROWS(phase_space_observable(cs, 1, "photons"));
}

TEST_CASE("constant observable stays constant") {
  ScalarObservable c;
  c.value = [](const CVector&) { return Complex(3.0); };
  c.gradient = [](const CVector&, CVector& g) { g.setZero(1); };
  c.hessian = [](const CVector&, CMatrix& h) { h.setZero(1, 1); };
  const SdeSystem ext = extend_with_observable(ou(1.0, 1.0), c);
  CVector x(2);
  x << 0.3, 3.0;
  const Path p = simulate_path(ext, x, TimeGrid{0.0, 1.0, 50}, 3);
  for (const auto& s : p.states) CHECK(s[1] == Complex(3.0));
}

TEST_CASE("identity observable reproduces its coordinate bit for bit") {
  const ModelParams p = cavity_like();
  const BasisFamily f = BasisFamily::additive_noise(4.0);
  const SdeSystem sys = make_jc_system(p, f, false);
  for (int i = 0; i < 4; ++i) {
    const SdeSystem ext = extend_with_observable(sys, coordinate_observable(i, 4));
    const CVector x0 = thermal_sampler(f, 5.0)(11);
    CVector xe(5);
    xe.head(4) = x0;
    xe[4] = x0[i];
    const TimeGrid g{0.0, 1e-3, 200};
    const Path a = simulate_path(sys, x0, g, 8);
    const Path b = simulate_path(ext, xe, g, 8);
    REQUIRE(a.states.size() == b.states.size());
    bool same = true;
    for (std::size_t t = 0; t < a.states.size(); ++t) {
      same = same && b.states[t][4] == a.states[t][i] && b.states[t].head(4) == a.states[t];
    }
    CHECK(same);
  }
}

TEST_CASE("augmented x^2 on an OU process carries the Ito correction") {
  const double theta = 1.5, sigma = 0.9, x0 = 0.4, T = 1.0;
  const SdeSystem ext = extend_with_observable(ou(theta, sigma), square());
  CVector a(2);
  CVector x(2);
  x << x0, x0 * x0;
  ext.drift(x, a);
  CHECK(std::abs(a[1] - (2.0 * x0 * (-theta * x0) + sigma * sigma)) < 1e-15);
  const InitSampler init = [x](std::uint64_t) { return x; };
  const std::vector<NamedObservable> obs{{"sigma", [](const CVector& s) { return s[1]; }}};
  const TimeGrid g{0.0, T, 500};
  const EnsembleResult r = run_ensemble(ext, init, g, 10000, 17, obs);
  const double expect = oracle::ou_second_moment(x0, theta, sigma, T);
  CHECK(std::abs(r.mean[0][g.steps].real() - expect) <= 4.0 * r.stderr(0, g.steps));
}

TEST_CASE("thermal initial inversion") {
  const BasisFamily f = BasisFamily::additive_noise(4.0);
  const SdeSystem sys = make_jc_system(cavity_like(), f, false);
  const std::vector<NamedObservable> obs{phase_space_observable(f, 1, "nu")};
  const EnsembleResult r = run_ensemble(sys, thermal_sampler(f, 5.0), TimeGrid{0.0, 1e-6, 1}, 10000, 1, obs);
  const double expect = 2.0 / (1.0 + std::exp(1.0)) - 1.0;
  CHECK(std::abs(expect + 0.4621) < 1e-4);
  CHECK(std::abs(r.mean[0][0] - expect) <= 4.0 * r.stderr(0, 0) + 1e-12);
}

TEST_CASE("augmented and projected means agree and z, w are conjugate on average") {
  const BasisFamily f = BasisFamily::additive_noise(4.0);
  const ModelParams p = cavity_like();
  const SdeSystem sys = make_jc_system(p, f, false);
  const SdeSystem ext = extend_with_observable(sys, fermionic_observable(f, FermionicQuantity::Nu, 1));
  const InitSampler base = thermal_sampler(f, 5.0);
  const InitSampler init = [base, f](std::uint64_t seed) {
    const CVector x = base(seed);
    CVector y(5);
    y.head(4) = x;
    y[4] = project(f, PhaseState(x)).nu;
    return y;
  };
  const auto nu = phase_space_observable(f, 1, "nu");
  const std::vector<NamedObservable> obs{
      {"projected", [nu](const CVector& y) { return nu.fn(y.head(4)); }},
      {"augmented", [](const CVector& y) { return y[4]; }},
      {"z", [](const CVector& y) { return y[2]; }},
      {"w", [](const CVector& y) { return y[3]; }}};
  const TimeGrid g{0.0, 0.1 * std::acos(-1.0) / 1100.0, 820};
  const EnsembleResult r = run_ensemble(ext, init, g, 2000, 5, obs);
  for (std::size_t t = 0; t < g.points(); t += 41) {
    CHECK(std::abs(r.mean[0][t] - r.mean[1][t]) <= 4.0 * (r.stderr(0, t) + r.stderr(1, t)) + 1e-12);
    CHECK(std::abs(r.mean[3][t] - std::conj(r.mean[2][t])) <= 4.0 * (r.stderr(2, t) + r.stderr(3, t)) + 1e-12);
  }
}
