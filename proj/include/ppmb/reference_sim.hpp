#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Sparse>

#include "ppmb/fermionic_init.hpp"
#include "ppmb/model_params.hpp"
#include "ppmb/observables.hpp"
#include "ppmb/sde_core.hpp"
#include "ppmb/types.hpp"

namespace ppmb {

using SparseCMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

inline constexpr std::size_t kDefaultDimensionCap = 4096;

/// Atom (x) Fock space with a photon cutoff n_max per mode. Basis index of
/// |s; n_1 ... n_N> is s + 2 sum_k n_k (n_max + 1)^(k-1), with s = 0 the lower
/// level.
struct TruncatedSpace {
  int n_max = 60;
  int modes = 1;
  std::size_t cap = kDefaultDimensionCap;

  std::size_t photon_states() const;
  std::size_t dimension() const { return 2 * photon_states(); }
  /// Throws CapacityError above the cap and DomainError for n_max < 1.
  void validate() const;
  int photons(std::size_t index, int mode) const;
};

/// hbar Omega S_z + sum hbar w_n a_n^dag a_n
///   + sum hbar g_n sin(k_n x0) (a_n^dag + a_n)(S_+ + S_-), without the RWA.
SparseCMatrix build_hamiltonian(const ModelParams& params, const TruncatedSpace& space);

/// a_k on the full space.
SparseCMatrix annihilation(const TruncatedSpace& space, int mode);

/// rho_atom (x) |a_1 ... a_N><a_1 ... a_N| with the truncated coherent states
/// renormalised.
CMatrix product_state(const TruncatedSpace& space, const AtomicDensity& atom,
                      const std::vector<Complex>& amplitudes);

/// Lindblad master equation right-hand side for a fixed model and space.
class MasterEquation {
 public:
  MasterEquation(const ModelParams& params, const TruncatedSpace& space);

  const SparseCMatrix& hamiltonian() const { return H_; }
  const TruncatedSpace& space() const { return space_; }

  void rhs(const CMatrix& rho, CMatrix& out) const;
  CMatrix rhs(const CMatrix& rho) const;

  /// rho21 = tr(S_- rho) etc. and per-mode <a + a^dag>, i<a^dag - a>.
  ObservableSet observe(const CMatrix& rho) const;
  Complex energy(const CMatrix& rho) const;

 private:
  ModelParams params_;
  TruncatedSpace space_;
  SparseCMatrix H_;
  std::vector<SparseCMatrix> a_;
  std::vector<double> sz_;  // S_z eigenvalue per basis index
};

CMatrix master_rhs(const ModelParams& params, const TruncatedSpace& space, const CMatrix& rho);

struct ReferenceDiagnostics {
  double max_trace_drift = 0.0;       // max |tr rho - 1|
  double max_hermiticity = 0.0;       // max ||rho - rho^dag||_max
  double max_energy_drift = 0.0;      // max |<H>(t) - <H>(0)| / |<H>(0)|
  double max_purity = 0.0;            // max tr rho^2
  double min_diagonal = 0.0;          // min Re rho_ii, a cheap positivity monitor
};

struct ReferenceTrajectory {
  TimeGrid grid;
  std::vector<ObservableSet> points;  // one per grid point
  ReferenceDiagnostics diagnostics;
  CMatrix final_state;
};

inline constexpr double kTraceDriftLimit = 1e-6;

/// Classical RK4 on the grid. Throws TraceDriftError once |tr rho - 1|
/// exceeds kTraceDriftLimit.
ReferenceTrajectory evolve(const ModelParams& params, const TruncatedSpace& space,
                           const CMatrix& rho0, const TimeGrid& grid);

}  // namespace ppmb
