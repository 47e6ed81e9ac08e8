#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ppmb/types.hpp"

namespace ppmb {

inline constexpr double kDefaultDivergenceThreshold = 1e6;

/// Equidistant grid t_i = t_start + i * dt, i = 0..steps.
struct TimeGrid {
  double t_start = 0.0;
  double t_end = 1.0;
  std::size_t steps = 1;

  double dt() const { return (t_end - t_start) / static_cast<double>(steps); }
  double time(std::size_t i) const { return t_start + static_cast<double>(i) * dt(); }
  std::size_t points() const { return steps + 1; }
  void validate() const;

  bool operator==(const TimeGrid&) const = default;
};

/// Ito SDE dX = A(X) dt + B(X) dW with complex coefficients and an
/// m-dimensional real Wiener process. Both callbacks must be pure and safe to
/// call concurrently; they write into preallocated outputs of the right shape.
struct SdeSystem {
  int state_dim = 0;
  int noise_dim = 0;
  std::function<void(const CVector& x, CVector& drift)> drift;
  std::function<void(const CVector& x, CMatrix& noise)> noise;
};

/// state + drift(state) dt + noise(state) dW.
CVector em_step(const CVector& state, double dt, std::span<const double> dW,
                const SdeSystem& system);

struct Path {
  std::vector<CVector> states;  // truncated at the first divergent point
  bool diverged = false;
};

Path simulate_path(const SdeSystem& system, const CVector& init, const TimeGrid& grid,
                   std::uint64_t seed,
                   double divergence_threshold = kDefaultDivergenceThreshold);

/// Seed of the independent stream used by path `index`. Depends only on
/// (master, index), never on scheduling.
std::uint64_t path_seed(std::uint64_t master, std::uint64_t index);

/// Substream of a path seed (0: initial sampling, 1: Wiener increments).
std::uint64_t substream_seed(std::uint64_t path_seed, std::uint64_t stream);

struct NamedObservable {
  std::string name;
  std::function<Complex(const CVector&)> fn;
};

/// Initial state for a path, drawn from its own seed.
using InitSampler = std::function<CVector(std::uint64_t seed)>;

struct EnsembleOptions {
  unsigned workers = 0;  // 0: hardware concurrency
  double divergence_threshold = kDefaultDivergenceThreshold;
  std::size_t block_size = 32;
};

/// Welford accumulator for complex samples; real and imaginary parts keep
/// separate second moments.
class ComplexMoments {
 public:
  void add(Complex x);
  void merge(const ComplexMoments& other);

  std::size_t count() const { return n_; }
  Complex mean() const { return mean_; }
  double stderr_re() const;
  double stderr_im() const;

 private:
  std::size_t n_ = 0;
  Complex mean_{0.0, 0.0};
  double m2_re_ = 0.0;
  double m2_im_ = 0.0;
};

struct EnsembleResult {
  TimeGrid grid;
  std::vector<std::string> names;
  std::vector<std::vector<Complex>> mean;      // [observable][time]
  std::vector<std::vector<double>> stderr_re;  // [observable][time]
  std::vector<std::vector<double>> stderr_im;
  std::size_t runs_requested = 0;
  std::size_t runs_diverged = 0;
  std::vector<std::size_t> diverged_paths;

  std::size_t runs_completed() const { return runs_requested - runs_diverged; }
  /// sqrt(stderr_re^2 + stderr_im^2).
  double stderr(std::size_t obs, std::size_t t) const;
  std::size_t index_of(const std::string& name) const;
};

/// Runs R independent paths and reduces the observables. Diverged paths are
/// excluded from all statistics and counted. Paths are reduced in blocks of
/// ascending index, so the result does not depend on the worker count.
EnsembleResult run_ensemble(const SdeSystem& system, const InitSampler& init_sampler,
                            const TimeGrid& grid, std::size_t runs, std::uint64_t master_seed,
                            const std::vector<NamedObservable>& observables,
                            const EnsembleOptions& options = {});

}  // namespace ppmb
