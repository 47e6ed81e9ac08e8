#include <random>

#include "doctest.h"
#include "ppmb/errors.hpp"
#include "ppmb/reference_sim.hpp"
#include "support/oracles.hpp"

using namespace ppmb;

namespace {

ModelParams model(int modes, double Omega, std::vector<double> w, std::vector<double> g,
                  DissipationRates r = {}, double x0 = 0.5) {
  ModelSpec s;
  s.modes = modes;
  s.Omega = Omega;
  s.frequencies = std::move(w);
  s.couplings = std::move(g);
  s.rates = r;
  s.x0 = x0;
  return ModelParams(s);
}

oracle::Mat dense_hamiltonian(const ModelParams& p, int n_max) {
  const int N = p.mode_count();
  const oracle::Mat sx = oracle::sigma_plus() + oracle::sigma_minus();
  oracle::Mat H = p.Omega() * oracle::lift(oracle::sigma_z(), -1, N, n_max);
  for (int k = 0; k < N; ++k) {
    const oracle::Mat a = oracle::lift(oracle::destroy(n_max), k, N, n_max);
    H += p.omega(k) * a.adjoint() * a;
    H += p.gs(k) * (a + a.adjoint()) * oracle::lift(sx, -1, N, n_max);
  }
  return p.hbar() * H;
}

oracle::Mat dissipator(const oracle::Mat& L, const oracle::Mat& rho) {
  const oracle::Mat LdL = L.adjoint() * L;
  return L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL);
}

oracle::Mat dense_lindblad(const ModelParams& p, int n_max, const oracle::Mat& rho) {
  const int N = p.mode_count();
  const oracle::Mat H = dense_hamiltonian(p, n_max);
  oracle::Mat out = -oracle::I / p.hbar() * (H * rho - rho * H);
  const auto& r = p.rates();
  out += r.r12 * dissipator(oracle::lift(oracle::sigma_plus(), -1, N, n_max), rho);
  out += r.r21 * dissipator(oracle::lift(oracle::sigma_minus(), -1, N, n_max), rho);
  out += 2.0 * r.rp * dissipator(oracle::lift(oracle::sigma_z(), -1, N, n_max), rho);
  return out;
}

oracle::Mat random_density(std::mt19937_64& rng, int dim) {
  oracle::Mat a(dim, dim);
  for (int j = 0; j < dim; ++j) a.col(j) = oracle::random_complex(rng, dim, 1.0);
  oracle::Mat rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_CASE("truncated space") {
  const TruncatedSpace s{3, 2, 4096};
  CHECK(s.photon_states() == 16);
  CHECK(s.dimension() == 32);
  CHECK(s.photons(2 * (1 + 4 * 3) + 1, 0) == 1);
  CHECK(s.photons(2 * (1 + 4 * 3) + 1, 1) == 3);
  CHECK_THROWS_AS((TruncatedSpace{60, 3, 4096}.validate()), CapacityError);
  CHECK_THROWS_AS((TruncatedSpace{0, 1, 4096}.validate()), DomainError);
  CHECK_NOTHROW((TruncatedSpace{60, 1, 4096}.validate()));
}

TEST_CASE("Hamiltonian matches a dense Kronecker construction") {
  std::mt19937_64 rng(1);
  const ModelParams p = model(2, 1.3, {0.7, 1.9}, {0.4, -0.2}, {}, 0.3);
  const TruncatedSpace s{3, 2, 4096};
  const CMatrix H(build_hamiltonian(p, s));
  const oracle::Mat ref = dense_hamiltonian(p, 3);
  CHECK((H - ref).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  const CMatrix a(annihilation(s, 1));
  CHECK((a - oracle::lift(oracle::destroy(3), 1, 2, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("decoupled Hamiltonian is diagonal") {
  const ModelParams p = model(1, 2.0, {3.0}, {0.0});
  const CMatrix H(build_hamiltonian(p, TruncatedSpace{5, 1, 4096}));
  CHECK((H - CMatrix(H.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
  CHECK(H(0, 0) == Complex(-1.0));
  CHECK(H(2 * 4 + 1, 2 * 4 + 1) == Complex(1.0 + 12.0));
}

TEST_CASE("coupling matrix elements") {
  const ModelParams p = model(1, 1.0, {1.0}, {0.3}, {}, 0.25);
  const TruncatedSpace s{6, 1, 4096};
  const CMatrix H(build_hamiltonian(p, s));
  for (int n = 0; n < 6; ++n) {
    // <up, n+1| H |down, n>
    CHECK(std::abs(H(2 * (n + 1) + 1, 2 * n) - p.gs(0) * std::sqrt(n + 1.0)) < 1e-15);
  }
}

TEST_CASE("master equation matches the dense Lindbladian") {
  std::mt19937_64 rng(2);
  const ModelParams p = model(2, 1.1, {0.8, 1.6}, {0.3, 0.5}, {0.2, 0.35, 0.15}, 0.4);
  const TruncatedSpace s{2, 2, 4096};
  for (int i = 0; i < 5; ++i) {
    const oracle::Mat rho = random_density(rng, 18);
    const CMatrix got = master_rhs(p, s, rho);
    const oracle::Mat ref = dense_lindblad(p, 2, rho);
    CHECK((got - ref).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(std::abs(got.trace()) < 1e-13);
    CHECK((got - got.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("observables of a product state") {
  const TruncatedSpace s{40, 1, 4096};
  const Complex a(1.2, -0.7);
  const AtomicDensity atom = AtomicDensity::from_populations(0.7, Complex(0.1, 0.2));
  const CMatrix rho = product_state(s, atom, {a});
  CHECK(std::abs(rho.trace() - 1.0) < 1e-14);
  const ModelParams p = model(1, 1.0, {1.0}, {0.1});
  const ObservableSet o = MasterEquation(p, s).observe(rho);
  CHECK(std::abs(o.rho11() - 0.7) < 1e-14);
  CHECK(std::abs(o.rho12 - Complex(0.1, 0.2)) < 1e-14);
  CHECK(std::abs(o.rho21 - Complex(0.1, -0.2)) < 1e-14);
  CHECK(std::abs(o.e[0] - 2.0 * a.real()) < 1e-12);
  CHECK(std::abs(o.h[0] - 2.0 * a.imag()) < 1e-12);
  CHECK_THROWS_AS(product_state(s, atom, {a, a}), DomainError);
}

TEST_CASE("free atom dynamics") {
  const TruncatedSpace s{2, 1, 4096};
  const DissipationRates r{0.3, 0.5, 0.2};
  const ModelParams p = model(1, 2.0, {1.0}, {0.0}, r);
  const AtomicDensity atom = AtomicDensity::from_populations(0.5, 0.5);
  const CMatrix rho0 = product_state(s, atom, {0.0});
  const TimeGrid g{0.0, 2.0, 2000};
  const ReferenceTrajectory tr = evolve(p, s, rho0, g);
  const double nu0 = (0.3 - 0.5) / 0.8;
  for (std::size_t i = 0; i < g.points(); i += 100) {
    const double t = g.time(i);
    const ObservableSet& o = tr.points[i];
    CHECK(std::abs(o.nu - nu0 * (1.0 - std::exp(-0.8 * t))) < 1e-9);
    CHECK(std::abs(o.rho21 - 0.5 * std::exp(Complex(-0.6, -2.0) * t)) < 1e-9);
  }
  CHECK(tr.diagnostics.max_trace_drift < 1e-12);
  CHECK(tr.diagnostics.max_hermiticity < 1e-12);
}

TEST_CASE("closed evolution conserves energy and purity") {
  const TruncatedSpace s{20, 1, 4096};
  const ModelParams p = model(1, 1.0, {1.1}, {0.2});
  const CMatrix rho0 = product_state(s, AtomicDensity::from_populations(1.0, 0.0), {2.0});
  const ReferenceTrajectory tr = evolve(p, s, rho0, TimeGrid{0.0, 5.0, 2000});
  CHECK(tr.diagnostics.max_energy_drift < 1e-9);
  CHECK(std::abs(tr.diagnostics.max_purity - 1.0) < 1e-9);
  CHECK(tr.diagnostics.min_diagonal > -1e-9);
  CHECK(tr.points.size() == 2001);
}

TEST_CASE("an unstable step raises a trace drift error") {
  const TruncatedSpace s{4, 1, 4096};
  const ModelParams p = model(1, 1.0, {1.0}, {2.0});
  const CMatrix rho0 = product_state(s, AtomicDensity::from_populations(0.5, 0.0), {1.0});
  CHECK_THROWS_AS(evolve(p, s, rho0, TimeGrid{0.0, 1e4, 100}), TraceDriftError);
}
