#include "ppmb/reference_sim.hpp"

#include <cmath>
#include <limits>

#include "ppmb/errors.hpp"

namespace ppmb {

std::size_t TruncatedSpace::photon_states() const {
  std::size_t n = 1;
  const std::size_t per = static_cast<std::size_t>(n_max) + 1;
  for (int k = 0; k < modes; ++k) {
    if (n > std::numeric_limits<std::size_t>::max() / per) {
      return std::numeric_limits<std::size_t>::max() / 2;
    }
    n *= per;
  }
  return n;
}

void TruncatedSpace::validate() const {
  if (n_max < 1) throw DomainError("photon cutoff n_max must be at least 1");
  if (modes < 1) throw DomainError("need at least one mode");
  if (dimension() > cap) {
    throw CapacityError("truncated space dimension " + std::to_string(dimension()) +
                        " exceeds the cap " + std::to_string(cap));
  }
}

int TruncatedSpace::photons(std::size_t index, int mode) const {
  std::size_t m = index / 2;
  const std::size_t per = static_cast<std::size_t>(n_max) + 1;
  for (int k = 0; k < mode; ++k) m /= per;
  return static_cast<int>(m % per);
}

namespace {

std::size_t mode_stride(const TruncatedSpace& space, int mode) {
  std::size_t stride = 2;
  for (int k = 0; k < mode; ++k) stride *= static_cast<std::size_t>(space.n_max) + 1;
  return stride;
}

}  // namespace

SparseCMatrix annihilation(const TruncatedSpace& space, int mode) {
  space.validate();
  const std::size_t dim = space.dimension();
  const std::size_t stride = mode_stride(space, mode);
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const int n = space.photons(j, mode);
    if (n == 0) continue;
    trips.emplace_back(static_cast<int>(j - stride), static_cast<int>(j), std::sqrt(double(n)));
  }
  SparseCMatrix a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

SparseCMatrix build_hamiltonian(const ModelParams& params, const TruncatedSpace& space) {
  space.validate();
  if (params.mode_count() != space.modes) {
    throw DomainError("truncated space and model disagree on the mode count");
  }
  const std::size_t dim = space.dimension();
  const double hbar = params.hbar();
  std::vector<Eigen::Triplet<Complex>> trips;
  for (std::size_t i = 0; i < dim; ++i) {
    double diag = hbar * params.Omega() * ((i % 2 == 0) ? -0.5 : 0.5);
    for (int k = 0; k < space.modes; ++k) diag += hbar * params.omega(k) * space.photons(i, k);
    trips.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
  }
  // (a^dag + a)(S_+ + S_-) flips the atom and moves one photon up or down.
  for (int k = 0; k < space.modes; ++k) {
    const double c = hbar * params.gs(k);
    if (c == 0.0) continue;
    const std::size_t stride = mode_stride(space, k);
    for (std::size_t j = 0; j < dim; ++j) {
      const int n = space.photons(j, k);
      const std::size_t flipped = (j % 2 == 0) ? j + 1 : j - 1;
      if (n < space.n_max) {
        const double v = c * std::sqrt(double(n + 1));
        trips.emplace_back(static_cast<int>(flipped + stride), static_cast<int>(j), v);
      }
      if (n > 0) {
        const double v = c * std::sqrt(double(n));
        trips.emplace_back(static_cast<int>(flipped - stride), static_cast<int>(j), v);
      }
    }
  }
  SparseCMatrix H(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  H.setFromTriplets(trips.begin(), trips.end());
  return H;
}

CMatrix product_state(const TruncatedSpace& space, const AtomicDensity& atom,
                      const std::vector<Complex>& amplitudes) {
  space.validate();
  if (static_cast<int>(amplitudes.size()) != space.modes) {
    throw DomainError("need one coherent amplitude per mode");
  }
  atom.validate(1e-9);
  const std::size_t photons = space.photon_states();
  CVector psi(static_cast<Eigen::Index>(photons));
  for (std::size_t m = 0; m < photons; ++m) {
    Complex amp{1.0, 0.0};
    for (int k = 0; k < space.modes; ++k) {
      const int n = space.photons(2 * m, k);
      // alpha^n / sqrt(n!) in log form to avoid overflow.
      const Complex a = amplitudes[k];
      if (n == 0) continue;
      if (a == Complex(0.0, 0.0)) {
        amp = 0.0;
        break;
      }
      amp *= std::exp(double(n) * std::log(a) - 0.5 * std::lgamma(n + 1.0));
    }
    psi[static_cast<Eigen::Index>(m)] = amp;
  }
  psi /= psi.norm();
  const Eigen::Matrix2cd ra = atom.matrix();
  const std::size_t dim = space.dimension();
  CMatrix rho(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      rho(i, j) = ra(i % 2, j % 2) * psi[i / 2] * std::conj(psi[j / 2]);
    }
  }
  return rho;
}

MasterEquation::MasterEquation(const ModelParams& params, const TruncatedSpace& space)
    : params_(params), space_(space), H_(build_hamiltonian(params, space)) {
  for (int k = 0; k < space.modes; ++k) a_.push_back(annihilation(space, k));
  sz_.resize(space.dimension());
  for (std::size_t i = 0; i < sz_.size(); ++i) sz_[i] = (i % 2 == 0) ? -0.5 : 0.5;
}

void MasterEquation::rhs(const CMatrix& rho, CMatrix& out) const {
  const Eigen::Index dim = rho.rows();
  const Complex f = -kI / params_.hbar();
  // rho H = (H rho^dag)^dag for Hermitian H; sparse-times-dense is the fast path.
  thread_local CMatrix right;
  right.noalias() = H_ * rho.adjoint();
  out.noalias() = H_ * rho;
  out -= right.adjoint();
  out *= f;

  const DissipationRates& r = params_.rates();
  if (!r.any()) return;
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double szj = sz_[j];
    const bool upj = j % 2 == 1;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double szi = sz_[i];
      const bool upi = i % 2 == 1;
      const Complex x = rho(i, j);
      Complex d = r.rp * (2.0 * szi * szj - 0.5) * x;
      d -= r.r21 * 0.5 * (szi + szj + 1.0) * x;
      d += r.r12 * 0.5 * (szi + szj - 1.0) * x;
      if (!upi && !upj) d += r.r21 * rho(i + 1, j + 1);
      if (upi && upj) d += r.r12 * rho(i - 1, j - 1);
      out(i, j) += d;
    }
  }
}

CMatrix MasterEquation::rhs(const CMatrix& rho) const {
  CMatrix out(rho.rows(), rho.cols());
  rhs(rho, out);
  return out;
}

ObservableSet MasterEquation::observe(const CMatrix& rho) const {
  ObservableSet o;
  Complex p11{0.0, 0.0}, p22{0.0, 0.0}, r21{0.0, 0.0}, r12{0.0, 0.0};
  for (Eigen::Index i = 0; i + 1 < rho.rows(); i += 2) {
    p11 += rho(i, i);
    p22 += rho(i + 1, i + 1);
    r21 += rho(i + 1, i);  // <up| rho |down>
    r12 += rho(i, i + 1);
  }
  o.rho21 = r21;
  o.rho12 = r12;
  o.nu = p22 - p11;
  for (const auto& a : a_) {
    // tr(a rho) = sum_jk a_jk rho_kj and tr(a^dag rho) = sum_jk conj(a_jk) rho_jk.
    Complex ea{0.0, 0.0}, eadag{0.0, 0.0};
    for (Eigen::Index j = 0; j < a.outerSize(); ++j) {
      for (SparseCMatrix::InnerIterator it(a, j); it; ++it) {
        ea += it.value() * rho(it.col(), j);
        eadag += std::conj(it.value()) * rho(j, it.col());
      }
    }
    o.e.push_back(eadag + ea);
    o.h.push_back(kI * (eadag - ea));
  }
  return o;
}

Complex MasterEquation::energy(const CMatrix& rho) const {
  Complex e{0.0, 0.0};
  for (Eigen::Index j = 0; j < H_.outerSize(); ++j) {
    for (SparseCMatrix::InnerIterator it(H_, j); it; ++it) e += it.value() * rho(it.col(), j);
  }
  return e;
}

CMatrix master_rhs(const ModelParams& params, const TruncatedSpace& space, const CMatrix& rho) {
  return MasterEquation(params, space).rhs(rho);
}

ReferenceTrajectory evolve(const ModelParams& params, const TruncatedSpace& space,
                           const CMatrix& rho0, const TimeGrid& grid) {
  grid.validate();
  const MasterEquation me(params, space);
  const Eigen::Index dim = static_cast<Eigen::Index>(space.dimension());
  if (rho0.rows() != dim || rho0.cols() != dim) {
    throw DomainError("initial density does not match the truncated space");
  }
  ReferenceTrajectory traj;
  traj.grid = grid;
  traj.points.reserve(grid.points());

  const Complex e0 = me.energy(rho0);
  const double e_scale = std::max(std::abs(e0), std::numeric_limits<double>::min());
  ReferenceDiagnostics& diag = traj.diagnostics;
  diag.min_diagonal = std::numeric_limits<double>::infinity();
  auto record = [&](const CMatrix& rho) {
    const double drift = std::abs(rho.trace() - 1.0);
    diag.max_trace_drift = std::max(diag.max_trace_drift, drift);
    double herm = 0.0;
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
      for (Eigen::Index i = 0; i <= j; ++i) {
        herm = std::max(herm, std::abs(rho(i, j) - std::conj(rho(j, i))));
      }
    }
    diag.max_hermiticity = std::max(diag.max_hermiticity, herm);
    diag.max_energy_drift =
        std::max(diag.max_energy_drift, std::abs(me.energy(rho) - e0) / e_scale);
    diag.max_purity = std::max(diag.max_purity, rho.cwiseAbs2().sum());
    diag.min_diagonal = std::min(diag.min_diagonal, rho.diagonal().real().minCoeff());
    if (!(drift <= kTraceDriftLimit)) {
      throw TraceDriftError("trace drifted by " + std::to_string(drift) +
                            "; reduce the step or raise the cutoff");
    }
    traj.points.push_back(me.observe(rho));
  };

  CMatrix rho = rho0;
  CMatrix k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), tmp(dim, dim);
  const double dt = grid.dt();
  record(rho);
  for (std::size_t s = 1; s <= grid.steps; ++s) {
    me.rhs(rho, k1);
    tmp = rho + (0.5 * dt) * k1;
    me.rhs(tmp, k2);
    tmp = rho + (0.5 * dt) * k2;
    me.rhs(tmp, k3);
    tmp = rho + dt * k3;
    me.rhs(tmp, k4);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    record(rho);
  }
  traj.final_state = std::move(rho);
  return traj;
}

}  // namespace ppmb
