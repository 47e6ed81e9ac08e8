#include "ppmb/invariants.hpp"

#include <cmath>
#include <random>

#include "json.hpp"
#include "ppmb/changed_vars.hpp"
#include "ppmb/errors.hpp"
#include "ppmb/fermionic_init.hpp"
#include "ppmb/mb_semiclassical.hpp"
#include "ppmb/observables.hpp"
#include "ppmb/reference_sim.hpp"

namespace ppmb {

bool InvariantReport::passed() const {
  for (const auto& s : suites) {
    if (!s.passed) return false;
  }
  return true;
}

std::string InvariantReport::to_json() const {
  nlohmann::ordered_json j;
  j["passed"] = passed();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : suites) {
    nlohmann::ordered_json o;
    o["name"] = s.name;
    o["passed"] = s.passed;
    o["checks"] = s.checks;
    o["max_error"] = s.max_error;
    o["tolerance"] = s.tolerance;
    if (!s.note.empty()) o["note"] = s.note;
    arr.push_back(o);
  }
  j["suites"] = arr;
  return j.dump(2) + "\n";
}

namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  Complex normal(double scale) {
    std::normal_distribution<double> n(0.0, scale);
    const double re = n(rng_);
    return {re, n(rng_)};
  }

  ModelParams model(int modes, bool rates) {
    ModelSpec spec;
    spec.modes = modes;
    spec.Omega = uniform(0.5, 2.0);
    double w = 0.0;
    for (int n = 0; n < modes; ++n) {
      w += uniform(0.3, 1.5);
      spec.frequencies.push_back(w);
      spec.couplings.push_back(uniform(-1.0, 1.0));
    }
    spec.x0 = uniform(0.1, 0.9);
    if (rates) spec.rates = {uniform(0.0, 1.0), uniform(0.0, 1.0), uniform(0.0, 1.0)};
    return ModelParams(spec);
  }

  CVector phase(int modes, double fermion_scale) {
    CVector x(2 * modes + 2);
    for (int i = 0; i < 2 * modes; ++i) x[i] = normal(1.5);
    x[2 * modes] = normal(fermion_scale);
    x[2 * modes + 1] = normal(fermion_scale);
    return x;
  }

 private:
  std::mt19937_64 rng_;
};

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

void record(SuiteResult& s, double err) {
  ++s.checks;
  s.max_error = std::isfinite(err) ? std::max(s.max_error, err) : HUGE_VAL;
}

void finish(SuiteResult& s) { s.passed = std::isfinite(s.max_error) && s.max_error <= s.tolerance; }

// Calls fn until it completes without hitting a pole; returns false after
// too many attempts.
template <typename Fn>
bool retry_poles(Fn&& fn) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    try {
      fn();
      return true;
    } catch (const PoleError&) {
    } catch (const UnreachableTargetError&) {
    }
  }
  return false;
}

struct Families {
  std::vector<BasisFamily> list;
  std::vector<double> scale;  // typical |z| for random states
};

Families families(const RunConfig& config) {
  Families f;
  f.list.push_back(BasisFamily::coherent_spin());
  f.scale.push_back(0.8);
  const Complex delta = config.family == FamilyKind::AdditiveNoise ? config.delta : Complex(4.0);
  const Complex kappa = config.family == FamilyKind::AdditiveNoise ? config.kappa : Complex(0.0);
  f.list.push_back(BasisFamily::additive_noise(delta, kappa));
  f.scale.push_back(std::abs(delta) / 2.0);
  return f;
}

SuiteResult basis_suite(const RunConfig& config, Sampler& rng) {
  SuiteResult s{"basis_family", true, 0, 0.0, 1e-12, ""};
  const Families fam = families(config);
  for (std::size_t i = 0; i < config.invariant_points; ++i) {
    for (std::size_t f = 0; f < fam.list.size(); ++f) {
      const BasisFamily& b = fam.list[f];
      retry_poles([&] {
        const Complex z = rng.normal(fam.scale[f]);
        const Complex w = rng.normal(fam.scale[f]);
        const BasisPoint tp = b.tilde_at(w);
        const Complex ref = std::conj(b.at(std::conj(w)).h);
        record(s, std::abs(tp.h - ref) / std::max(1.0, std::abs(ref)));
        const BasisPoint p = b.at(z);
        if (b.kind() == FamilyKind::AdditiveNoise) {
          const Complex lhs = b.delta() * p.dh;
          const Complex rhs = p.h * p.h - 1.0;
          record(s, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
        }
        const Complex back = b.at(b.invert(p.h)).h;
        record(s, std::abs(back - p.h) / std::max(1.0, std::abs(p.h)));
      });
    }
  }
  finish(s);
  return s;
}

SuiteResult init_suite(const RunConfig& config, Sampler& rng) {
  SuiteResult s{"fermionic_init", true, 0, 0.0, 1e-12, ""};
  auto check = [&s](const AtomicDensity& rho, const BasisFamily& family) {
    const InitDistribution d = init_points(rho, family);
    Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
    for (const auto& p : d.points) sum += p.weight * fermionic_kernel(family, p.z, p.w);
    record(s, (sum - rho.matrix()).cwiseAbs().maxCoeff());
  };
  const BasisFamily cs = BasisFamily::coherent_spin();
  for (std::size_t i = 0; i < config.invariant_points; ++i) {
    const double p = rng.uniform(0.05, 0.95);
    const double rmax = std::sqrt(p * (1.0 - p));
    const double r = rng.uniform(0.0, rmax);
    check(AtomicDensity::from_populations(p, std::polar(r, rng.uniform(-3.14, 3.14))), cs);
  }
  const AtomicDensity thermal = AtomicDensity::from_populations(1.0 / (1.0 + std::exp(-1.0)), 0.0);
  for (const auto& f : families(config).list) check(thermal, f);
  finish(s);
  return s;
}

SuiteResult factorization_suite(const RunConfig& config, Sampler& rng,
                                const InvariantHooks& hooks) {
  SuiteResult s{"jc_factorization", true, 0, 0.0, 1e-12, ""};
  const Families fam = families(config);
  for (std::size_t i = 0; i < config.invariant_points; ++i) {
    for (std::size_t f = 0; f < fam.list.size(); ++f) {
      for (bool diss : {false, true}) {
        const ModelParams params = rng.model(2, diss);
        retry_poles([&] {
          const CVector phi = rng.phase(2, fam.scale[f]);
          CMatrix B, D;
          hooks.jc_noise(params, fam.list[f], diss, phi, B);
          jc_diffusion_into(params, fam.list[f], diss, phi, D);
          const CMatrix diff = B * B.transpose() - D;
          record(s, max_abs(diff) / (1.0 + max_abs(D)));
        });
      }
    }
  }
  finish(s);
  return s;
}

SuiteResult additive_constant_suite(const RunConfig& config, Sampler& rng,
                                    const InvariantHooks& hooks) {
  SuiteResult s{"jc_additive_noise_constant", true, 0, 0.0, 0.0, ""};
  const Families fam = families(config);
  const BasisFamily& an = fam.list[1];
  const ModelParams params = rng.model(2, false);
  CMatrix B0;
  hooks.jc_noise(params, an, false, CVector::Zero(6), B0);
  for (std::size_t i = 0; i < config.invariant_points; ++i) {
    retry_poles([&] {
      CMatrix B;
      hooks.jc_noise(params, an, false, rng.phase(2, fam.scale[1]), B);
      record(s, max_abs(B - B0));
    });
  }
  finish(s);
  return s;
}

SuiteResult derivative_suite(const RunConfig& config, Sampler& rng) {
  SuiteResult s{"observable_derivatives", true, 0, 0.0, 1e-6, "fourth-order central differences"};
  const Families fam = families(config);
  const double h = 1e-3;
  for (std::size_t i = 0; i < config.invariant_points; ++i) {
    for (std::size_t f = 0; f < fam.list.size(); ++f) {
      for (auto q : {FermionicQuantity::Rho21, FermionicQuantity::Rho12, FermionicQuantity::Nu}) {
        const ScalarObservable v = fermionic_observable(fam.list[f], q, 1);
        retry_poles([&] {
          const CVector x = rng.phase(1, fam.scale[f]);
          CVector g;
          CMatrix H;
          v.gradient(x, g);
          v.hessian(x, H);
          double scale = 1.0;
          double err = 0.0;
          for (int a = 2; a < 4; ++a) {
            auto shifted = [&](double t) {
              CVector y = x;
              y[a] += t;
              return y;
            };
            const Complex fd = (8.0 * (v.value(shifted(h)) - v.value(shifted(-h))) -
                                (v.value(shifted(2 * h)) - v.value(shifted(-2 * h)))) /
                               (12.0 * h);
            scale = std::max(scale, std::abs(fd));
            err = std::max(err, std::abs(fd - g[a]));
            CVector g1, g2, g3, g4;
            v.gradient(shifted(h), g1);
            v.gradient(shifted(-h), g2);
            v.gradient(shifted(2 * h), g3);
            v.gradient(shifted(-2 * h), g4);
            for (int b = 2; b < 4; ++b) {
              const Complex fd2 = (8.0 * (g1[b] - g2[b]) - (g3[b] - g4[b])) / (12.0 * h);
              scale = std::max(scale, std::abs(fd2));
              err = std::max(err, std::abs(fd2 - H(a, b)));
            }
          }
          record(s, err / scale);
        });
      }
    }
  }
  finish(s);
  return s;
}

// Analytic Jacobian and fermionic Hessians of the change of variables.
struct ChangeMap {
  CMatrix J;                  // (2N+3) x (2N+2)
  std::vector<CMatrix> hess;  // Hessians of rho21, rho12, nu
};

ChangeMap change_map(const BasisFamily& family, int N, const CVector& phi) {
  ChangeMap m;
  m.J = CMatrix::Zero(2 * N + 3, 2 * N + 2);
  for (int n = 0; n < N; ++n) {
    m.J(2 * n, 2 * n) = 1.0;
    m.J(2 * n, 2 * n + 1) = 1.0;
    m.J(2 * n + 1, 2 * n) = -kI;
    m.J(2 * n + 1, 2 * n + 1) = kI;
  }
  int row = 2 * N;
  for (auto q : {FermionicQuantity::Rho21, FermionicQuantity::Rho12, FermionicQuantity::Nu}) {
    const ScalarObservable v = fermionic_observable(family, q, N);
    CVector g;
    CMatrix H;
    v.gradient(phi, g);
    v.hessian(phi, H);
    m.J.row(row++) = g.transpose();
    m.hess.push_back(H);
  }
  return m;
}

SuiteResult ito_suite(const RunConfig& config, Sampler& rng, const InvariantHooks& hooks) {
  SuiteResult s{"changed_vars_ito_drift", true, 0, 0.0, 1e-6, ""};
  const Families fam = families(config);
  const int N = 2;
  for (std::size_t i = 0; i < config.invariant_points; ++i) {
    for (std::size_t f = 0; f < fam.list.size(); ++f) {
      const ModelParams params = rng.model(N, true);
      retry_poles([&] {
        const CVector phi = rng.phase(N, fam.scale[f]);
        CVector A(phi.size());
        CMatrix B;
        jc_drift_into(params, fam.list[f], true, phi, A);
        hooks.jc_noise(params, fam.list[f], true, phi, B);
        const CMatrix D = B * B.transpose();
        const ChangeMap m = change_map(fam.list[f], N, phi);
        CVector ito = m.J * A;
        for (int k = 0; k < 3; ++k) ito[2 * N + k] += 0.5 * (m.hess[k].cwiseProduct(D)).sum();
        const CVector bar = drift_bar(params, to_physical(fam.list[f], PhaseState(phi)));
        record(s, (ito - bar).cwiseAbs().maxCoeff() / (1.0 + bar.cwiseAbs().maxCoeff()));
      });
    }
  }
  finish(s);
  return s;
}

SuiteResult jacobian_suite(const RunConfig& config, Sampler& rng, const InvariantHooks& hooks) {
  SuiteResult s{"changed_vars_noise_jacobian", true, 0, 0.0, 1e-8, "coherent-spin"};
  const BasisFamily cs = BasisFamily::coherent_spin();
  const int N = 2;
  for (std::size_t i = 0; i < config.invariant_points; ++i) {
    const ModelParams params = rng.model(N, true);
    retry_poles([&] {
      const CVector phi = rng.phase(N, 0.8);
      CMatrix B;
      hooks.jc_noise(params, cs, true, phi, B);
      const ChangeMap m = change_map(cs, N, phi);
      const CMatrix target = m.J * (B * B.transpose()) * m.J.transpose();
      const CMatrix Bbar = noise_bar(params, to_physical(cs, PhaseState(phi)));
      const CMatrix got = Bbar * Bbar.transpose();
      record(s, max_abs(got - target) / (1.0 + max_abs(target)));
    });
  }
  finish(s);
  return s;
}

SuiteResult roundtrip_suite(const RunConfig& config, Sampler& rng) {
  SuiteResult s{"changed_vars_roundtrip", true, 0, 0.0, 1e-12, ""};
  const Families fam = families(config);
  for (std::size_t i = 0; i < config.invariant_points; ++i) {
    for (std::size_t f = 0; f < fam.list.size(); ++f) {
      retry_poles([&] {
        const CVector phi = rng.phase(2, fam.scale[f]);
        const PhysState phys = to_physical(fam.list[f], PhaseState(phi));
        const PhysState again = to_physical(fam.list[f], from_physical(fam.list[f], phys));
        const double scale = 1.0 + phys.vector().cwiseAbs().maxCoeff();
        record(s, (again.vector() - phys.vector()).cwiseAbs().maxCoeff() / scale);
      });
    }
  }
  finish(s);
  return s;
}

SuiteResult reference_suite(const RunConfig& config, Sampler& rng) {
  SuiteResult s{"reference_sim", true, 0, 0.0, 1e-12, "trace of rhs, Hamiltonian hermiticity"};
  const TruncatedSpace space{4, 2, kDefaultDimensionCap};
  const int dim = static_cast<int>(space.dimension());
  const std::size_t n = std::min<std::size_t>(config.invariant_points, 20);
  for (std::size_t i = 0; i < n; ++i) {
    const ModelParams params = rng.model(2, true);
    const MasterEquation me(params, space);
    CMatrix a(dim, dim);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) a(r, c) = rng.normal(1.0);
    }
    CMatrix rho = a * a.adjoint();
    rho /= rho.trace();
    const CMatrix d = me.rhs(rho);
    record(s, std::abs(d.trace()) / (1.0 + max_abs(d)));
    const CMatrix H(me.hamiltonian());
    record(s, max_abs(H - H.adjoint()) / (1.0 + max_abs(H)));
  }
  finish(s);
  return s;
}

SuiteResult mb_suite(const RunConfig& config, Sampler& rng) {
  SuiteResult s{"mb_hermitian_slice", true, 0, 0.0, 1e-14, ""};
  for (std::size_t i = 0; i < config.invariant_points; ++i) {
    const ModelParams params = rng.model(2, true);
    MbState m = MbState::zero(2);
    for (int n = 0; n < 2; ++n) {
      m.epsilon[n] = rng.uniform(-3.0, 3.0);
      m.eta[n] = rng.uniform(-3.0, 3.0);
    }
    m.nu = rng.uniform(-1.0, 1.0);
    m.rho21 = std::polar(rng.uniform(0.0, 0.5 * std::sqrt(1.0 - m.nu * m.nu)),
                         rng.uniform(-3.14, 3.14));
    const PhysState d = mb_rhs(params, m).to_phys();
    const CVector bar = drift_bar(params, m.to_phys());
    record(s, (d.vector() - bar).cwiseAbs().maxCoeff() / (1.0 + bar.cwiseAbs().maxCoeff()));
  }
  finish(s);
  return s;
}

}  // namespace

InvariantReport check_invariants(const RunConfig& config, const InvariantHooks& hooks) {
  Sampler rng(config.invariant_seed);
  InvariantReport report;
  report.suites.push_back(basis_suite(config, rng));
  report.suites.push_back(init_suite(config, rng));
  report.suites.push_back(factorization_suite(config, rng, hooks));
  report.suites.push_back(additive_constant_suite(config, rng, hooks));
  report.suites.push_back(derivative_suite(config, rng));
  report.suites.push_back(roundtrip_suite(config, rng));
  report.suites.push_back(ito_suite(config, rng, hooks));
  report.suites.push_back(jacobian_suite(config, rng, hooks));
  report.suites.push_back(reference_suite(config, rng));
  report.suites.push_back(mb_suite(config, rng));
  return report;
}

}  // namespace ppmb
