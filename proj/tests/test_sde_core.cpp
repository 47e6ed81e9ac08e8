#include <random>

#include "doctest.h"
#include "ppmb/errors.hpp"
#include "ppmb/sde_core.hpp"
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

InitSampler constant(CVector x) {
  return [x](std::uint64_t) { return x; };
}

NamedObservable coord(int i) {
  return {"x" + std::to_string(i), [i](const CVector& x) { return x[i]; }};
}

NamedObservable square(int i) {
  return {"x2", [i](const CVector& x) { return x[i] * x[i]; }};
}

}  // namespace

TEST_CASE("time grid") {
  TimeGrid g{0.0, 1.0, 4};
  CHECK(g.dt() == 0.25);
  CHECK(g.points() == 5);
  CHECK(g.time(4) == 1.0);
  CHECK_THROWS_AS((TimeGrid{0.0, 1.0, 0}.validate()), DomainError);
  CHECK_THROWS_AS((TimeGrid{1.0, 1.0, 3}.validate()), DomainError);
}

TEST_CASE("euler step") {
  SdeSystem s = ou(2.0, 0.0);
  CVector x(1);
  x[0] = 1.0;
  const std::vector<double> dW{0.3};
  CHECK(std::abs(em_step(x, 0.1, dW, s)[0] - 0.8) < 1e-15);

  SdeSystem idle = ou(0.0, 0.0);
  CHECK(em_step(x, 0.1, dW, idle)[0] == x[0]);

  SdeSystem noisy = ou(0.0, 2.0);
  CHECK(std::abs(em_step(x, 0.1, dW, noisy)[0] - 1.6) < 1e-15);
  CHECK_THROWS_AS(em_step(x, 0.1, std::vector<double>{1.0, 2.0}, noisy), DomainError);
}

TEST_CASE("noise-free path equals explicit Euler") {
  SdeSystem s = ou(1.5, 0.0);
  CVector x(1);
  x[0] = 2.0;
  const TimeGrid g{0.0, 1.0, 50};
  const Path p = simulate_path(s, x, g, 1);
  CHECK_FALSE(p.diverged);
  REQUIRE(p.states.size() == 51);
  Complex e = 2.0;
  for (std::size_t i = 1; i <= 50; ++i) {
    e = e + (-1.5 * e) * g.dt();
    CHECK(p.states[i][0] == e);
  }
}

TEST_CASE("paths are deterministic per seed") {
  SdeSystem s = ou(1.0, 0.7);
  CVector x(1);
  x[0] = 0.0;
  const TimeGrid g{0.0, 1.0, 100};
  const Path a = simulate_path(s, x, g, 42);
  const Path b = simulate_path(s, x, g, 42);
  const Path c = simulate_path(s, x, g, 43);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    same = same && a.states[i][0] == b.states[i][0];
    differ = differ || a.states[i][0] != c.states[i][0];
  }
  CHECK(same);
  CHECK(differ);
  CHECK(path_seed(1, 2) != path_seed(2, 1));
  CHECK(substream_seed(5, 0) != substream_seed(5, 1));
}

TEST_CASE("OU ensemble matches closed-form mean and variance") {
  const double theta = 2.0, sigma = 0.8, x0 = 1.0, T = 1.0;
  CVector x(1);
  x[0] = x0;
  const TimeGrid g{0.0, T, 400};
  const EnsembleResult r =
      run_ensemble(ou(theta, sigma), constant(x), g, 10000, 7, {coord(0), square(0)});
  const std::size_t last = g.steps;
  // Euler-Maruyama bias at dt = 2.5e-3 is far below the statistical error.
  const double m = oracle::ou_mean(x0, theta, T);
  const double m2 = oracle::ou_second_moment(x0, theta, sigma, T);
  CHECK(std::abs(r.mean[0][last].real() - m) <= 4.0 * r.stderr(0, last));
  CHECK(std::abs(r.mean[1][last].real() - m2) <= 4.0 * r.stderr(1, last));
  const double var = m2 - m * m;
  const double var_est = r.mean[1][last].real() - std::pow(r.mean[0][last].real(), 2);
  CHECK(std::abs(var_est - var) <= 4.0 * (r.stderr(1, last) + 2 * std::abs(m) * r.stderr(0, last)));
  CHECK(r.runs_diverged == 0);
}

TEST_CASE("ensemble is independent of the worker count and block size") {
  CVector x(1);
  x[0] = 0.5;
  const TimeGrid g{0.0, 0.5, 20};
  EnsembleOptions one;
  one.workers = 1;
  EnsembleOptions many;
  many.workers = 4;
  many.block_size = 3;
  const auto a = run_ensemble(ou(1.0, 1.0), constant(x), g, 101, 5, {coord(0)}, one);
  const auto b = run_ensemble(ou(1.0, 1.0), constant(x), g, 101, 5, {coord(0)}, many);
  for (std::size_t t = 0; t < g.points(); ++t) {
    CHECK(std::abs(a.mean[0][t] - b.mean[0][t]) < 1e-14);
    CHECK(std::abs(a.stderr(0, t) - b.stderr(0, t)) < 1e-14);
  }
  EnsembleOptions again = one;
  const auto c = run_ensemble(ou(1.0, 1.0), constant(x), g, 101, 5, {coord(0)}, again);
  for (std::size_t t = 0; t < g.points(); ++t) CHECK(a.mean[0][t] == c.mean[0][t]);
}

TEST_CASE("streaming statistics agree with stored paths") {
  CVector x(1);
  x[0] = Complex(0.2, -0.1);
  const TimeGrid g{0.0, 0.3, 10};
  SdeSystem s = ou(0.5, 1.0);
  s.noise = [](const CVector&, CMatrix& b) { b(0, 0) = Complex(0.6, 0.8); };
  const std::size_t R = 57;
  const std::uint64_t master = 9;
  const auto r = run_ensemble(s, constant(x), g, R, master, {coord(0)});
  std::vector<std::vector<Complex>> paths;
  for (std::size_t i = 0; i < R; ++i) {
    const Path p = simulate_path(s, x, g, substream_seed(path_seed(master, i), 1));
    std::vector<Complex> v;
    for (const auto& st : p.states) v.push_back(st[0]);
    paths.push_back(v);
  }
  for (std::size_t t = 0; t < g.points(); ++t) {
    Complex mean = 0.0;
    for (const auto& p : paths) mean += p[t];
    mean /= double(R);
    double sre = 0.0, sim = 0.0;
    for (const auto& p : paths) {
      sre += std::pow(p[t].real() - mean.real(), 2);
      sim += std::pow(p[t].imag() - mean.imag(), 2);
    }
    CHECK(std::abs(r.mean[0][t] - mean) < 1e-12);
    CHECK(std::abs(r.stderr_re[0][t] - std::sqrt(sre / (R - 1) / R)) < 1e-12);
    CHECK(std::abs(r.stderr_im[0][t] - std::sqrt(sim / (R - 1) / R)) < 1e-12);
  }
}

TEST_CASE("single run has zero stderr") {
  CVector x(1);
  x[0] = 1.0;
  const auto r = run_ensemble(ou(1.0, 1.0), constant(x), TimeGrid{0.0, 1.0, 5}, 1, 3, {coord(0)});
  for (std::size_t t = 0; t < 6; ++t) CHECK(r.stderr(0, t) == 0.0);
}

TEST_CASE("divergent paths are excluded and counted") {
  // dx = x^2 dt + dW blows up for paths that wander to large x.
  SdeSystem s;
  s.state_dim = 1;
  s.noise_dim = 1;
  s.drift = [](const CVector& x, CVector& a) { a[0] = x[0] * x[0]; };
  s.noise = [](const CVector&, CMatrix& b) { b(0, 0) = 1.0; };
  const InitSampler init = [](std::uint64_t seed) {
    CVector x(1);
    x[0] = (seed % 2 == 0) ? 5.0 : -0.5;
    return x;
  };
  EnsembleOptions opt;
  opt.divergence_threshold = 1e3;
  const auto r = run_ensemble(s, init, TimeGrid{0.0, 1.0, 200}, 200, 1, {coord(0)}, opt);
  CHECK(r.runs_diverged > 0);
  CHECK(r.runs_diverged < r.runs_requested);
  CHECK(r.diverged_paths.size() == r.runs_diverged);
  for (std::size_t t = 0; t < r.grid.points(); ++t) CHECK(std::isfinite(std::abs(r.mean[0][t])));

  const InitSampler blow = [](std::uint64_t) {
    CVector x(1);
    x[0] = 10.0;
    return x;
  };
  CHECK_THROWS_AS(run_ensemble(s, blow, TimeGrid{0.0, 1.0, 200}, 10, 1, {coord(0)}, opt),
                  AllDivergedError);
}

TEST_CASE("pole errors mark paths as diverged") {
  SdeSystem s = ou(1.0, 0.0);
  s.drift = [](const CVector& x, CVector& a) {
    if (x[0].real() > 0.0) throw PoleError("pole");
    a[0] = 0.0;
  };
  const InitSampler init = [](std::uint64_t seed) {
    CVector x(1);
    x[0] = (seed % 3 == 0) ? 1.0 : -1.0;
    return x;
  };
  const auto r = run_ensemble(s, init, TimeGrid{0.0, 1.0, 5}, 60, 2, {coord(0)});
  CHECK(r.runs_diverged > 0);
  CHECK(std::abs(r.mean[0][5] + 1.0) < 1e-15);
}

TEST_CASE("moments merge like a single pass") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(1.0, 2.0);
  ComplexMoments all, a, b;
  for (int i = 0; i < 1000; ++i) {
    const Complex x(g(rng), g(rng));
    all.add(x);
    (i < 300 ? a : b).add(x);
  }
  a.merge(b);
  CHECK(a.count() == all.count());
  CHECK(std::abs(a.mean() - all.mean()) < 1e-13);
  CHECK(std::abs(a.stderr_re() - all.stderr_re()) < 1e-13);
  CHECK(std::abs(a.stderr_im() - all.stderr_im()) < 1e-13);
}
