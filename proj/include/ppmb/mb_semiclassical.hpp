#pragma once

#include <cstddef>
#include <vector>

#include "ppmb/changed_vars.hpp"
#include "ppmb/model_params.hpp"
#include "ppmb/observables.hpp"
#include "ppmb/sde_core.hpp"
#include "ppmb/types.hpp"

namespace ppmb {

/// Maxwell-Bloch state on the Hermitian slice: real mode quadratures, real
/// inversion, and rho12 = conj(rho21).
struct MbState {
  std::vector<double> epsilon;
  std::vector<double> eta;
  Complex rho21{0.0, 0.0};
  double nu = -1.0;

  static MbState zero(int modes);
  /// Throws DomainError unless phys lies on the Hermitian slice within tol.
  static MbState from_phys(const PhysState& phys, double tol = 1e-12);
  PhysState to_phys() const;

  int mode_count() const { return static_cast<int>(epsilon.size()); }
  /// |rho21|^2 - (1 - nu^2)/4; positive outside the Bloch ball.
  double bloch_excess() const;
};

MbState mb_rhs(const ModelParams& params, const MbState& state);

struct MbTrajectory {
  TimeGrid grid;
  std::vector<ObservableSet> points;
  MbState final_state;
  std::size_t bloch_violations = 0;  // grid points beyond the bound + 1e-9
  double max_bloch_excess = 0.0;
};

inline constexpr double kBlochTolerance = 1e-9;

/// Classical RK4 on the grid.
MbTrajectory evolve_mb(const ModelParams& params, const MbState& state0, const TimeGrid& grid);

}  // namespace ppmb
