#include "ppmb/sde_core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

#include "ppmb/errors.hpp"

namespace ppmb {

void TimeGrid::validate() const {
  if (steps < 1) throw DomainError("time grid needs at least one step");
  if (!(t_end > t_start) || !std::isfinite(t_end - t_start)) {
    throw DomainError("time grid needs t_end > t_start");
  }
}

namespace {

struct Workspace {
  explicit Workspace(const SdeSystem& s)
      : drift(s.state_dim), noise(s.state_dim, s.noise_dim), dW(s.noise_dim) {}
  CVector drift;
  CMatrix noise;
  std::vector<double> dW;
};

// out_i = x_i + drift_i dt + sum_j noise_ij dW_j, summed in ascending j for
// every row. `out` may alias `x`.
void apply_increment(const CVector& x, const CVector& drift, const CMatrix& noise, double dt,
                     std::span<const double> dW, CVector& out) {
  const Eigen::Index n = x.size();
  const Eigen::Index m = noise.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    Complex stochastic{0.0, 0.0};
    for (Eigen::Index j = 0; j < m; ++j) stochastic += noise(i, j) * dW[j];
    out[i] = x[i] + drift[i] * dt + stochastic;
  }
}

bool is_divergent(const CVector& x, double threshold) {
  const double t2 = threshold * threshold;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double re = x[i].real();
    const double im = x[i].imag();
    if (!std::isfinite(re) || !std::isfinite(im)) return true;
    if (re * re + im * im > t2) return true;
  }
  return false;
}

// Integrates one path, calling visit(i, state) at every grid point. Returns
// false when the path diverges (threshold, non-finite, or a pole).
template <typename Visitor>
bool integrate(const SdeSystem& system, CVector x, const TimeGrid& grid, std::uint64_t seed,
               double threshold, Workspace& ws, Visitor&& visit) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);
  try {
    if (is_divergent(x, threshold)) return false;
    visit(std::size_t{0}, x);
    for (std::size_t i = 1; i <= grid.steps; ++i) {
      for (auto& w : ws.dW) w = sqrt_dt * normal(rng);
      system.drift(x, ws.drift);
      system.noise(x, ws.noise);
      apply_increment(x, ws.drift, ws.noise, dt, ws.dW, x);
      if (is_divergent(x, threshold)) return false;
      visit(i, x);
    }
  } catch (const PoleError&) {
    return false;
  }
  return true;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

CVector em_step(const CVector& state, double dt, std::span<const double> dW,
                const SdeSystem& system) {
  if (static_cast<int>(dW.size()) != system.noise_dim) {
    throw DomainError("em_step: dW has wrong length");
  }
  CVector drift(system.state_dim);
  CMatrix noise(system.state_dim, system.noise_dim);
  system.drift(state, drift);
  system.noise(state, noise);
  CVector out(state.size());
  apply_increment(state, drift, noise, dt, dW, out);
  return out;
}

Path simulate_path(const SdeSystem& system, const CVector& init, const TimeGrid& grid,
                   std::uint64_t seed, double divergence_threshold) {
  grid.validate();
  if (init.size() != system.state_dim) throw DomainError("simulate_path: init has wrong length");
  Workspace ws(system);
  Path path;
  path.states.reserve(grid.points());
  const bool ok = integrate(system, init, grid, seed, divergence_threshold, ws,
                            [&](std::size_t, const CVector& x) { path.states.push_back(x); });
  path.diverged = !ok;
  return path;
}

std::uint64_t path_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed + 0xd1b54a32d192ed03ULL * (stream + 1));
}

void ComplexMoments::add(Complex x) {
  ++n_;
  const Complex delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  const Complex delta2 = x - mean_;
  m2_re_ += delta.real() * delta2.real();
  m2_im_ += delta.imag() * delta2.imag();
}

void ComplexMoments::merge(const ComplexMoments& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const Complex delta = other.mean_ - mean_;
  mean_ += delta * (nb / n);
  m2_re_ += other.m2_re_ + delta.real() * delta.real() * na * nb / n;
  m2_im_ += other.m2_im_ + delta.imag() * delta.imag() * na * nb / n;
  n_ += other.n_;
}

double ComplexMoments::stderr_re() const {
  if (n_ < 2) return 0.0;
  const double n = static_cast<double>(n_);
  return std::sqrt(m2_re_ / (n - 1.0) / n);
}

double ComplexMoments::stderr_im() const {
  if (n_ < 2) return 0.0;
  const double n = static_cast<double>(n_);
  return std::sqrt(m2_im_ / (n - 1.0) / n);
}

double EnsembleResult::stderr(std::size_t obs, std::size_t t) const {
  return std::hypot(stderr_re[obs][t], stderr_im[obs][t]);
}

std::size_t EnsembleResult::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DomainError("ensemble result has no observable '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

namespace {

struct BlockStats {
  std::vector<ComplexMoments> moments;  // [obs * points + t]
  std::vector<std::size_t> diverged;
};

}  // namespace

EnsembleResult run_ensemble(const SdeSystem& system, const InitSampler& init_sampler,
                            const TimeGrid& grid, std::size_t runs, std::uint64_t master_seed,
                            const std::vector<NamedObservable>& observables,
                            const EnsembleOptions& options) {
  grid.validate();
  if (runs < 1) throw DomainError("run_ensemble needs at least one run");
  const std::size_t points = grid.points();
  const std::size_t n_obs = observables.size();
  const std::size_t block_size = std::max<std::size_t>(1, options.block_size);
  const std::size_t n_blocks = (runs + block_size - 1) / block_size;

  unsigned workers = options.workers;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_blocks));

  std::atomic<std::size_t> next_block{0};
  std::mutex merge_mutex;
  std::vector<std::optional<BlockStats>> finished(n_blocks);
  std::size_t next_merge = 0;
  BlockStats total;
  total.moments.resize(n_obs * points);
  std::exception_ptr failure;

  auto worker = [&]() {
    Workspace ws(system);
    std::vector<Complex> buffer(n_obs * points);
    try {
      for (std::size_t b = next_block++; b < n_blocks; b = next_block++) {
        BlockStats stats;
        stats.moments.resize(n_obs * points);
        const std::size_t first = b * block_size;
        const std::size_t last = std::min(runs, first + block_size);
        for (std::size_t r = first; r < last; ++r) {
          const std::uint64_t seed = path_seed(master_seed, r);
          bool ok = false;
          try {
            const CVector init = init_sampler(substream_seed(seed, 0));
            ok = integrate(system, init, grid, substream_seed(seed, 1),
                           options.divergence_threshold, ws,
                           [&](std::size_t i, const CVector& x) {
                             for (std::size_t k = 0; k < n_obs; ++k) {
                               buffer[k * points + i] = observables[k].fn(x);
                             }
                           });
          } catch (const PoleError&) {
            ok = false;
          }
          if (ok) {
            for (std::size_t k = 0; k < buffer.size(); ++k) stats.moments[k].add(buffer[k]);
          } else {
            stats.diverged.push_back(r);
          }
        }
        std::lock_guard lock(merge_mutex);
        finished[b] = std::move(stats);
        while (next_merge < n_blocks && finished[next_merge]) {
          BlockStats& done = *finished[next_merge];
          for (std::size_t k = 0; k < total.moments.size(); ++k) {
            total.moments[k].merge(done.moments[k]);
          }
          total.diverged.insert(total.diverged.end(), done.diverged.begin(), done.diverged.end());
          finished[next_merge].reset();
          ++next_merge;
        }
      }
    } catch (...) {
      std::lock_guard lock(merge_mutex);
      if (!failure) failure = std::current_exception();
      next_block = n_blocks;
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  EnsembleResult result;
  result.grid = grid;
  result.runs_requested = runs;
  result.runs_diverged = total.diverged.size();
  result.diverged_paths = std::move(total.diverged);
  if (result.runs_diverged == runs) {
    throw AllDivergedError("all " + std::to_string(runs) + " paths diverged");
  }
  result.names.reserve(n_obs);
  result.mean.assign(n_obs, std::vector<Complex>(points));
  result.stderr_re.assign(n_obs, std::vector<double>(points));
  result.stderr_im.assign(n_obs, std::vector<double>(points));
  for (std::size_t k = 0; k < n_obs; ++k) {
    result.names.push_back(observables[k].name);
    for (std::size_t i = 0; i < points; ++i) {
      const ComplexMoments& m = total.moments[k * points + i];
      result.mean[k][i] = m.mean();
      result.stderr_re[k][i] = m.stderr_re();
      result.stderr_im[k][i] = m.stderr_im();
    }
  }
  return result;
}

}  // namespace ppmb
